use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::dense::DenseMatrix;
use super::ledger::FlopLedger;
use crate::error::{Error, Result};

type C64 = Complex64;

/// Rows below this count are multiplied sequentially even with `parallel`.
#[cfg(feature = "parallel")]
const PAR_ROW_THRESHOLD: usize = 4096;

/// Compressed sparse row matrix with complex entries.
///
/// Column indices are strictly increasing within each row and exact zeros
/// are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Builds from raw CSR arrays, validating ordering and dropping zeros.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 || col_idx.len() != values.len() {
            return Err(Error::Dimension("inconsistent CSR arrays".into()));
        }
        if row_ptr[nrows] != col_idx.len() {
            return Err(Error::Dimension("row_ptr does not end at nnz".into()));
        }
        for r in 0..nrows {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= ncols) {
                return Err(Error::Dimension(format!("row {r} has unsorted or out-of-range columns")));
            }
        }
        let mut m = Self { nrows, ncols, row_ptr, col_idx, values };
        m.drop_zeros();
        Ok(m)
    }

    /// Assembles from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trips: Vec<(usize, usize, C64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trips.len());
        let mut values: Vec<C64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = Self { nrows, ncols, row_ptr, col_idx, values };
        m.drop_zeros();
        m
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: vec![], values: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let n = d.len();
        let trips = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(n, n, trips)
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut trips = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let v = a[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    trips.push((i, j, v));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), trips)
    }

    fn drop_zeros(&mut self) {
        if !self.values.iter().any(|v| v.re == 0.0 && v.im == 0.0) {
            return;
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.values[k];
                if v.re != 0.0 || v.im != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    values.push(v);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.row_ptr[self.nrows]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Iterates the stored entries of one row as (column, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest |i - j| over stored entries, split into (lower, upper).
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for r in 0..self.nrows {
            for (c, _) in self.row(r) {
                if c < r {
                    kl = kl.max(r - c);
                } else {
                    ku = ku.max(c - r);
                }
            }
        }
        (kl, ku)
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.values[k] * x[self.col_idx[k]];
        }
        acc
    }

    /// y = A x, always on the calling thread.
    pub fn spmv_seq(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x length");
        assert_eq!(y.len(), self.nrows, "spmv: y length");
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row_dot(r, x);
        }
    }

    /// y = A x with rows split across the rayon pool.
    #[cfg(feature = "parallel")]
    pub fn spmv_par(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x length");
        assert_eq!(y.len(), self.nrows, "spmv: y length");
        y.par_iter_mut().enumerate().with_min_len(512).for_each(|(r, yr)| {
            *yr = self.row_dot(r, x);
        });
    }

    /// y = A x.
    pub fn spmv_into(&self, x: &[C64], y: &mut [C64]) {
        #[cfg(feature = "parallel")]
        if self.nrows >= PAR_ROW_THRESHOLD {
            return self.spmv_par(x, y);
        }
        self.spmv_seq(x, y)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.spmv_into(x, &mut y);
        y
    }

    /// y = b - A x.
    pub fn residual_into(&self, b: &[C64], x: &[C64], y: &mut [C64]) {
        self.spmv_into(x, y);
        for (yi, bi) in y.iter_mut().zip(b) {
            *yi = *bi - *yi;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let nnz = self.nnz();
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![C64::new(0.0, 0.0); nnz];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                col_idx[dst] = r;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr: counts, col_idx, values }
    }

    /// Sparse product self * other using a dense row accumulator.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let n = other.ncols;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut mark = vec![usize::MAX; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = acc[c];
                if v.re != 0.0 || v.im != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows: self.nrows, ncols: n, row_ptr, col_idx, values })
    }

    /// Returns a * self + b * other.
    pub fn lincomb(&self, a: C64, other: &CsrMatrix, b: C64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Dimension("lincomb shape mismatch".into()));
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        for r in 0..self.nrows {
            let (mut i, ie) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let (mut j, je) = (other.row_ptr[r], other.row_ptr[r + 1]);
            while i < ie || j < je {
                let ci = if i < ie { self.col_idx[i] } else { usize::MAX };
                let cj = if j < je { other.col_idx[j] } else { usize::MAX };
                let (c, v) = if ci == cj {
                    let v = a * self.values[i] + b * other.values[j];
                    i += 1;
                    j += 1;
                    (ci, v)
                } else if ci < cj {
                    i += 1;
                    (ci, a * self.values[i - 1])
                } else {
                    j += 1;
                    (cj, b * other.values[j - 1])
                };
                if v.re != 0.0 || v.im != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values })
    }

    pub fn add(&self, other: &CsrMatrix) -> Result<Self> {
        self.lincomb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &CsrMatrix) -> Result<Self> {
        self.lincomb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m.drop_zeros();
        m
    }

    /// diag(d) * self.
    pub fn scale_rows(&self, d: &[C64]) -> Self {
        assert_eq!(d.len(), self.nrows);
        let mut m = self.clone();
        for r in 0..m.nrows {
            for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                m.values[k] *= d[r];
            }
        }
        m.drop_zeros();
        m
    }

    /// self * diag(d).
    pub fn scale_cols(&self, d: &[C64]) -> Self {
        assert_eq!(d.len(), self.ncols);
        let mut m = self.clone();
        for k in 0..m.values.len() {
            m.values[k] *= d[m.col_idx[k]];
        }
        m.drop_zeros();
        m
    }

    /// Adds `d` to the main diagonal.
    pub fn add_diag(&self, d: &[C64]) -> Self {
        self.add(&Self::from_diag(d)).expect("add_diag: square matrix")
    }

    /// Standard Kronecker product self ⊗ other.
    pub fn kron(&self, other: &CsrMatrix) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut values = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.nrows {
            for rb in 0..other.nrows {
                for (ca, va) in self.row(ra) {
                    for (cb, vb) in other.row(rb) {
                        col_idx.push(ca * other.ncols + cb);
                        values.push(va * vb);
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        let mut m = Self { nrows, ncols, row_ptr, col_idx, values };
        m.drop_zeros();
        m
    }

    /// Stacks matrices with equal column counts vertically.
    pub fn vstack(blocks: &[&CsrMatrix]) -> Result<Self> {
        let ncols = blocks.first().map(|b| b.ncols).unwrap_or(0);
        let mut trips = Vec::new();
        let mut off = 0;
        for b in blocks {
            if b.ncols != ncols {
                return Err(Error::Dimension("vstack column mismatch".into()));
            }
            for r in 0..b.nrows {
                trips.extend(b.row(r).map(|(c, v)| (off + r, c, v)));
            }
            off += b.nrows;
        }
        Ok(Self::from_triplets(off, ncols, trips))
    }

    /// Assembles a block matrix; `None` entries are zero blocks.
    pub fn block(rows: &[Vec<Option<&CsrMatrix>>], row_sizes: &[usize], col_sizes: &[usize]) -> Result<Self> {
        let nrows: usize = row_sizes.iter().sum();
        let ncols: usize = col_sizes.iter().sum();
        let mut trips = Vec::new();
        let mut roff = 0;
        for (bi, brow) in rows.iter().enumerate() {
            let mut coff = 0;
            for (bj, blk) in brow.iter().enumerate() {
                if let Some(b) = blk {
                    if b.nrows != row_sizes[bi] || b.ncols != col_sizes[bj] {
                        return Err(Error::Dimension(format!("block ({bi},{bj}) has wrong shape")));
                    }
                    for r in 0..b.nrows {
                        trips.extend(b.row(r).map(|(c, v)| (roff + r, coff + c, v)));
                    }
                }
                coff += col_sizes[bj];
            }
            roff += row_sizes[bi];
        }
        Ok(Self::from_triplets(nrows, ncols, trips))
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(blocks: &[&CsrMatrix]) -> Self {
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let ncols = blocks.iter().map(|b| b.ncols).sum();
        let mut trips = Vec::new();
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for r in 0..b.nrows {
                trips.extend(b.row(r).map(|(c, v)| (ro + r, co + c, v)));
            }
            ro += b.nrows;
            co += b.ncols;
        }
        Self::from_triplets(nrows, ncols, trips)
    }

    /// Extracts rows `r0..r1` and columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut trips = Vec::new();
        for r in r0..r1 {
            trips.extend(self.row(r).filter(|&(c, _)| c >= c0 && c < c1).map(|(c, v)| (r - r0, c - c0, v)));
        }
        Self::from_triplets(r1 - r0, c1 - c0, trips)
    }

    /// Symmetric permutation P A Pᵀ where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Self {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(perm.len(), self.nrows);
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut trips = Vec::with_capacity(self.nnz());
        for (new_r, &old_r) in perm.iter().enumerate() {
            trips.extend(self.row(old_r).map(|(c, v)| (new_r, inv[c], v)));
        }
        Self::from_triplets(self.nrows, self.ncols, trips)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    pub fn map_values(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v = f(*v));
        m.drop_zeros();
        m
    }
}

/// y = A x, charging nnz(A) to the ledger.
pub fn spmv(a: &CsrMatrix, x: &[C64], ledger: &FlopLedger) -> Result<Vec<C64>> {
    if x.len() != a.ncols() {
        return Err(Error::Dimension(format!("spmv: matrix has {} columns, vector has {}", a.ncols(), x.len())));
    }
    ledger.charge(a.nnz());
    Ok(a.mul_vec(x))
}

/// Exact sparse Galerkin product R A P.
pub fn triple_product(r: &CsrMatrix, a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    r.matmul(&a.matmul(p)?)
}
