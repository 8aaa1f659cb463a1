pub mod analysis;
pub mod discretize;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod linop;
pub mod krylov;
pub mod media;
pub mod media3d;
pub mod multigrid;
pub mod precond;
pub mod sparse;
pub mod suites;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
