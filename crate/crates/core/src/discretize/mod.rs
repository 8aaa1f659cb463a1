//! Staggered-grid operators of the mixed elastic Helmholtz system.

pub mod ops;
pub mod system;

pub use ops::{average_cells_to, build_averaging, build_gradient, derivative, face_average, gradient_blocks, Averaging};
pub use system::{
    apply_shift, assemble_block, build_ap, build_commutator, build_hp, point_source, shifted_saddle, ApVariant,
    Commutator, SaddleSystem,
};
