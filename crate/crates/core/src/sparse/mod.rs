//! Complex sparse and small dense linear algebra.

pub mod banded;
pub mod csr;
pub mod dense;
pub mod eig;
pub mod ledger;
pub mod ordering;

pub use banded::{BandedLu, DirectSolver};
pub use csr::{spmv, triple_product, CsrMatrix};
pub use dense::{dense_solve, CheckedSolve, DenseLu, DenseMatrix};
pub use eig::{dense_eig, dense_eig_capped, hausdorff, power_method, PowerEstimate};
pub use ledger::{FlopLedger, FlopSnapshot};
