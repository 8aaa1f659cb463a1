use num_complex::Complex64;

use crate::sparse::{CsrMatrix, FlopLedger};

type C64 = Complex64;

/// A fixed square linear map applied with operation accounting.
pub trait LinearMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], ledger: &FlopLedger) -> Vec<C64>;
}

impl LinearMap for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        ledger.charge(self.nnz());
        self.mul_vec(x)
    }
}

/// The identity map, used as "no preconditioner".
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearMap for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64], _ledger: &FlopLedger) -> Vec<C64> {
        x.to_vec()
    }
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `aᴴ b`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}
