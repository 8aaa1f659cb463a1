use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Families;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, DenseLu, DenseMatrix, FlopLedger};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmootherKind {
    Jacobi,
    VankaRb,
}

/// Smoother choice with per-level damping; levels past the list reuse the
/// last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmootherParams {
    pub kind: SmootherKind,
    pub damping: Vec<f64>,
}

impl SmootherParams {
    pub fn jacobi() -> Self {
        Self { kind: SmootherKind::Jacobi, damping: vec![0.8, 0.8, 0.3] }
    }

    pub fn jacobi_3d() -> Self {
        Self { kind: SmootherKind::Jacobi, damping: vec![0.8, 0.8, 0.2] }
    }

    pub fn vanka() -> Self {
        Self { kind: SmootherKind::VankaRb, damping: vec![0.65, 0.5, 0.3] }
    }

    pub fn damping_at(&self, level: usize) -> f64 {
        *self.damping.get(level).or(self.damping.last()).unwrap_or(&1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.damping.is_empty() || self.damping.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
            return Err(Error::Config(format!("damping values must lie in (0, 1], got {:?}", self.damping)));
        }
        Ok(())
    }
}

/// Inverse diagonal for Jacobi; fails on a zero diagonal entry.
pub fn inverse_diagonal(h: &CsrMatrix) -> Result<Vec<C64>> {
    h.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d.norm() == 0.0 {
                Err(Error::Singular(format!("zero diagonal entry in row {i}")))
            } else {
                Ok(C64::new(1.0, 0.0) / d)
            }
        })
        .collect()
}

/// One damped Jacobi sweep `x += ω D⁻¹ (b - H x)`, charging `nnz(H) + n`.
pub fn jacobi_sweep(h: &CsrMatrix, dinv: &[C64], x: &mut [C64], b: &[C64], damping: f64, ledger: &FlopLedger) {
    let n = x.len();
    let mut r = vec![C64::new(0.0, 0.0); n];
    h.residual_into(b, x, &mut r);
    ledger.charge(h.nnz() + n);
    let update = |(xi, (ri, di)): (&mut C64, (&C64, &C64))| *xi += damping * ri * di;
    #[cfg(feature = "parallel")]
    {
        if n >= 4096 {
            x.par_iter_mut().zip(r.par_iter().zip(dinv.par_iter())).for_each(update);
            return;
        }
    }
    x.iter_mut().zip(r.iter().zip(dinv.iter())).for_each(update);
}

/// Cell-wise Vanka data: for every cell, its `2d + 1` unknowns and the
/// inverse of the local principal submatrix, grouped by red/black colour.
#[derive(Debug, Clone)]
pub struct Vanka {
    block: usize,
    colors: [Vec<usize>; 2],
    dofs: Vec<usize>,
    inv: Vec<C64>,
}

impl Vanka {
    pub fn new(k: &CsrMatrix, fam: &Families) -> Result<Self> {
        let cells = *fam.layouts.last().expect("pressure family");
        let dim = cells.dim;
        let block = 2 * dim + 1;
        let nc = cells.len();
        let mut dofs = Vec::with_capacity(nc * block);
        let mut colors = [Vec::new(), Vec::new()];
        for c in 0..nc {
            let ci = cells.coords(c);
            for a in 0..dim {
                let fl = fam.layouts[a];
                let mut hi = ci;
                hi[a] = if fl.periodic { (ci[a] + 1) % fl.cells[a] } else { ci[a] + 1 };
                dofs.push(fam.offsets[a] + fl.index(ci));
                dofs.push(fam.offsets[a] + fl.index(hi));
            }
            dofs.push(fam.offsets[dim] + c);
            colors[(ci[0] + ci[1] + ci[2]) % 2].push(c);
        }
        let mut inv = vec![C64::new(0.0, 0.0); nc * block * block];
        for c in 0..nc {
            let idx = &dofs[c * block..(c + 1) * block];
            let local = DenseMatrix::from_fn(block, block, |i, j| k.get(idx[i], idx[j]));
            let lu = DenseLu::factor(&local)
                .map_err(|_| Error::Singular(format!("local Vanka block of cell {:?} is singular", cells.coords(c))))?;
            for j in 0..block {
                let mut e = vec![C64::new(0.0, 0.0); block];
                e[j] = C64::new(1.0, 0.0);
                lu.solve_in_place(&mut e);
                for i in 0..block {
                    inv[c * block * block + i * block + j] = e[i];
                }
            }
        }
        Ok(Self { block, colors, dofs, inv })
    }

    pub fn n_cells(&self) -> usize {
        self.colors[0].len() + self.colors[1].len()
    }

    /// One red-black sweep. Each colour computes the residual once and
    /// applies additive local corrections on disjoint unknowns, so the
    /// result does not depend on the order within a colour. Charges
    /// `nnz(K) + 17 n_cells`.
    pub fn sweep(&self, k: &CsrMatrix, x: &mut [C64], b: &[C64], damping: f64, ledger: &FlopLedger) {
        ledger.charge(k.nnz() + 17 * self.n_cells());
        let bs = self.block;
        let mut r = vec![C64::new(0.0, 0.0); x.len()];
        for color in &self.colors {
            k.residual_into(b, x, &mut r);
            let local = |&c: &usize| {
                let idx = &self.dofs[c * bs..(c + 1) * bs];
                let m = &self.inv[c * bs * bs..(c + 1) * bs * bs];
                let mut d = [C64::new(0.0, 0.0); 7];
                for i in 0..bs {
                    let mut s = C64::new(0.0, 0.0);
                    for j in 0..bs {
                        s += m[i * bs + j] * r[idx[j]];
                    }
                    d[i] = s * damping;
                }
                (c, d)
            };
            #[cfg(feature = "parallel")]
            let updates: Vec<(usize, [C64; 7])> = if color.len() >= 1024 {
                color.par_iter().map(local).collect()
            } else {
                color.iter().map(local).collect()
            };
            #[cfg(not(feature = "parallel"))]
            let updates: Vec<(usize, [C64; 7])> = color.iter().map(local).collect();
            for (c, d) in updates {
                for i in 0..bs {
                    x[self.dofs[c * bs + i]] += d[i];
                }
            }
        }
    }
}
