use num_complex::Complex64;

use super::csr::CsrMatrix;
use super::dense::{DenseLu, DenseMatrix};
use crate::error::{Error, Result};

type C64 = Complex64;

/// Banded LU factorization with partial pivoting (LAPACK `gbtrf` layout).
///
/// The matrix is optionally permuted symmetrically first; `perm[new] = old`.
/// Column `j` of the band occupies `ab[j*ldab .. (j+1)*ldab]` with row `i`
/// at offset `kl + ku + i - j`; the top `kl` rows hold pivoting fill.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
    perm: Option<Vec<usize>>,
}

impl BandedLu {
    /// Factors `a` in its given ordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_impl(a, None)
    }

    /// Factors `P a Pᵀ` for the ordering `perm` (new → old).
    pub fn factor_ordered(a: &CsrMatrix, perm: &[usize]) -> Result<Self> {
        let pa = a.permute_symmetric(perm);
        Self::factor_impl(&pa, Some(perm.to_vec()))
    }

    fn factor_impl(a: &CsrMatrix, perm: Option<Vec<usize>>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!("banded LU of {}x{} matrix", a.nrows(), a.ncols())));
        }
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C64::new(0.0, 0.0); ldab * n];
        let mut maxabs: f64 = 0.0;
        for r in 0..n {
            for (c, v) in a.row(r) {
                ab[c * ldab + kv + r - c] = v;
                maxabs = maxabs.max(v.norm());
            }
        }
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut jp = 0;
            let mut best = ab[col].norm();
            for i in 1..=km {
                let v = ab[col + i].norm();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || best < 1e-14 * maxabs {
                return Err(Error::Singular(format!("banded LU pivot {best:.3e} at column {j}")));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let base = c * ldab + kv;
                    ab.swap(base + j - c, base + j + jp - c);
                }
            }
            if km == 0 {
                continue;
            }
            let inv = C64::new(1.0, 0.0) / ab[col];
            for i in 1..=km {
                ab[col + i] *= inv;
            }
            let (left, right) = ab.split_at_mut((j + 1) * ldab);
            let lcol = &left[col + 1..col + 1 + km];
            for c in j + 1..=ju {
                let base = (c - j - 1) * ldab + kv;
                let u = right[base + j - c];
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                let dst = &mut right[base + j + 1 - c..base + j + 1 - c + km];
                for (d, l) in dst.iter_mut().zip(lcol) {
                    *d -= l * u;
                }
            }
        }
        Ok(Self { n, kl, ku, ab, ipiv, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Nonzero entries stored in the L and U factors.
    pub fn factor_nnz(&self) -> usize {
        self.ab.iter().filter(|v| v.re != 0.0 || v.im != 0.0).count()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        assert_eq!(x.len(), self.n, "banded solve: rhs length");
        match &self.perm {
            Some(p) => {
                let mut y: Vec<C64> = p.iter().map(|&old| x[old]).collect();
                self.solve_band(&mut y);
                for (new, &old) in p.iter().enumerate() {
                    x[old] = y[new];
                }
            }
            None => self.solve_band(x),
        }
    }

    fn solve_band(&self, b: &mut [C64]) {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ldab = 2 * kl + self.ku + 1;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            if bj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = j * ldab + kv;
            for i in 1..=km {
                b[j + i] -= self.ab[col + i] * bj;
            }
        }
        for j in (0..n).rev() {
            let col = j * ldab + kv;
            b[j] /= self.ab[col];
            let bj = b[j];
            if bj == C64::new(0.0, 0.0) {
                continue;
            }
            let top = j.saturating_sub(kv);
            for i in top..j {
                b[i] -= self.ab[col + i - j] * bj;
            }
        }
    }
}

/// Direct solver chosen by bandwidth: band storage when affordable, dense LU
/// otherwise.
#[derive(Debug, Clone)]
pub enum DirectSolver {
    Banded(BandedLu),
    Dense { lu: DenseLu, nnz: usize },
}

impl DirectSolver {
    /// Largest half-bandwidth factored in band storage.
    pub const DEFAULT_BAND_CAP: usize = 4000;
    /// Largest system factored densely.
    pub const DENSE_CAP: usize = 5000;

    pub fn new(a: &CsrMatrix, perm: Option<&[usize]>) -> Result<Self> {
        Self::with_band_cap(a, perm, Self::DEFAULT_BAND_CAP)
    }

    pub fn with_band_cap(a: &CsrMatrix, perm: Option<&[usize]>, cap: usize) -> Result<Self> {
        let (kl, ku) = match perm {
            Some(p) => a.permute_symmetric(p).bandwidths(),
            None => a.bandwidths(),
        };
        if kl.max(ku) <= cap {
            let f = match perm {
                Some(p) => BandedLu::factor_ordered(a, p)?,
                None => BandedLu::factor(a)?,
            };
            return Ok(Self::Banded(f));
        }
        if a.nrows() > Self::DENSE_CAP {
            return Err(Error::Capacity(format!(
                "system of size {} has bandwidth {} above cap {cap} and is too large for dense LU",
                a.nrows(),
                kl.max(ku)
            )));
        }
        let lu = DenseLu::factor(&a.to_dense())?;
        let n = a.nrows();
        Ok(Self::Dense { lu, nnz: n * n })
    }

    pub fn dense(a: &DenseMatrix) -> Result<Self> {
        let n = a.nrows();
        Ok(Self::Dense { lu: DenseLu::factor(a)?, nnz: n * n })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Banded(f) => f.dim(),
            Self::Dense { lu, .. } => lu.dim(),
        }
    }

    pub fn factor_nnz(&self) -> usize {
        match self {
            Self::Banded(f) => f.factor_nnz(),
            Self::Dense { nnz, .. } => *nnz,
        }
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        match self {
            Self::Banded(f) => f.solve_in_place(x),
            Self::Dense { lu, .. } => lu.solve_in_place(x),
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn rel_residual(a: &CsrMatrix, x: &[C64], b: &[C64]) -> f64 {
        let ax = a.mul_vec(x);
        let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        r / b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn diagonal_solve() {
        let a = CsrMatrix::from_diag(&[c(2.0); 6]);
        let f = BandedLu::factor(&a).unwrap();
        let x = f.solve(&[c(2.0); 6]);
        assert!(x.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
    }

    #[test]
    fn helmholtz_1d_matches_dense_lu() {
        let n = 40;
        let k2 = 30.0;
        let h = 1.0 / (n + 1) as f64;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, c(2.0 / (h * h) - k2)));
            if i > 0 {
                trips.push((i, i - 1, c(-1.0 / (h * h))));
            }
            if i + 1 < n {
                trips.push((i, i + 1, c(-1.0 / (h * h))));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, trips);
        let b: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 0.3)).collect();
        let xb = BandedLu::factor(&a).unwrap().solve(&b);
        let xd = DenseLu::factor(&a.to_dense()).unwrap().solve(&b);
        let scale = xd.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (p, q) in xb.iter().zip(&xd) {
            assert!((p - q).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn pivoting_with_zero_diagonal() {
        // [[0,1],[1,0]] needs a row swap.
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0)), (1, 0, c(1.0))]);
        let x = BandedLu::factor(&a).unwrap().solve(&[c(3.0), c(4.0)]);
        assert!((x[0] - c(4.0)).norm() < 1e-15 && (x[1] - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn random_banded_with_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, C64::new(4.0 + rng.gen::<f64>(), rng.gen())));
            for d in 1..=3 {
                if i + d < n {
                    trips.push((i, i + d, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                    trips.push((i + d, i, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, trips);
        let b: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        let perm: Vec<usize> = (0..n).rev().collect();
        for f in [BandedLu::factor(&a).unwrap(), BandedLu::factor_ordered(&a, &perm).unwrap()] {
            let x = f.solve(&b);
            assert!(rel_residual(&a, &x, &b) <= 1e-12);
        }
    }

    #[test]
    fn singular_band_rejected() {
        let a = CsrMatrix::from_triplets(3, 3, vec![(0, 0, c(1.0)), (1, 0, c(1.0)), (2, 2, c(1.0))]);
        assert!(matches!(BandedLu::factor(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn direct_solver_falls_back_to_dense() {
        let n = 12;
        let mut trips: Vec<_> = (0..n).map(|i| (i, i, c(3.0))).collect();
        trips.push((0, n - 1, c(1.0)));
        trips.push((n - 1, 0, c(1.0)));
        let a = CsrMatrix::from_triplets(n, n, trips);
        let s = DirectSolver::with_band_cap(&a, None, 2).unwrap();
        assert!(matches!(s, DirectSolver::Dense { .. }));
        let b = vec![c(1.0); n];
        assert!(rel_residual(&a, &s.solve(&b), &b) < 1e-14);
    }
}
