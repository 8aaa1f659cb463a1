use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Row-major complex dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![C64::new(0.0, 0.0); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(nrows: usize, cols: &[Vec<C64>]) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows);
            for i in 0..nrows {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut out = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.nrows.min(self.ncols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// LU factorization with partial pivoting, PA = LU.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DenseMatrix,
    piv: Vec<usize>,
    swaps: usize,
    norm_inf: f64,
}

/// Solution plus diagnostics from [`DenseLu::solve_checked`].
#[derive(Debug, Clone)]
pub struct CheckedSolve {
    pub x: Vec<C64>,
    pub relative_residual: f64,
    pub rcond: f64,
    pub ill_conditioned: bool,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::Dimension(format!("dense LU of {}x{} matrix", a.nrows, a.ncols)));
        }
        let n = a.nrows;
        let norm_inf = a.norm_inf();
        let maxabs = a.max_abs();
        let mut lu = a.clone();
        let mut piv = vec![0usize; n];
        let mut swaps = 0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 || best < 1e-14 * maxabs {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                swaps += 1;
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
            }
            let inv = C64::new(1.0, 0.0) / lu[(k, k)];
            let (head, tail) = lu.data.split_at_mut((k + 1) * n);
            let krow = &head[k * n..(k + 1) * n];
            for i in 0..n - k - 1 {
                let row = &mut tail[i * n..(i + 1) * n];
                let l = row[k] * inv;
                row[k] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= l * krow[j];
                }
            }
        }
        Ok(Self { lu, piv, swaps, norm_inf })
    }

    pub fn dim(&self) -> usize {
        self.piv.len()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
    }

    pub fn determinant(&self) -> C64 {
        let mut d: C64 = (0..self.dim()).map(|i| self.lu[(i, i)]).product();
        if self.swaps % 2 == 1 {
            d = -d;
        }
        d
    }

    /// Reciprocal infinity-norm condition number from the explicit inverse.
    /// Intended for the small systems where a dense factorization is used.
    pub fn rcond(&self) -> f64 {
        let n = self.dim();
        let mut inv_norm: f64 = 0.0;
        let mut rows = vec![0.0f64; n];
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            self.solve_in_place(&mut e);
            for i in 0..n {
                rows[i] += e[i].norm();
            }
        }
        for r in rows {
            inv_norm = inv_norm.max(r);
        }
        1.0 / (self.norm_inf * inv_norm)
    }

    /// Solves and reports the residual and conditioning of the system.
    pub fn solve_checked(&self, a: &DenseMatrix, b: &[C64]) -> CheckedSolve {
        let x = self.solve(b);
        let ax = a.mul_vec(&x);
        let rn: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let rcond = self.rcond();
        CheckedSolve { x, relative_residual: rn / bn, rcond, ill_conditioned: rcond < 1e-10 }
    }
}

/// Factors and solves a dense system in one call.
pub fn dense_solve(a: &DenseMatrix, b: &[C64]) -> Result<Vec<C64>> {
    Ok(DenseLu::factor(a)?.solve(b))
}
