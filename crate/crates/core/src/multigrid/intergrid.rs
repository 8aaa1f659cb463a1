use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Layout;
use crate::sparse::CsrMatrix;

type C64 = Complex64;

/// One-dimensional restriction stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction1d {
    /// `[1 2 1]/4` on nodes; coarse node `J` sits on fine node `2J`.
    Nodal121,
    /// `[1 3 * 3 1]/8` on cells; coarse cell `j` covers fine `2j, 2j+1`.
    Cell1331,
    /// `[1 * 1]/2` on cells.
    Cell11,
}

/// Builds a 1D restriction for `fine_cells` cells. Nodal operators act on
/// `fine_cells + 1` nodes unless periodic. Out-of-range taps are dropped.
pub fn build_restriction_1d(kind: Restriction1d, fine_cells: usize, periodic: bool) -> Result<CsrMatrix> {
    if fine_cells < 2 || !fine_cells.is_multiple_of(2) {
        return Err(Error::Grid(format!("{fine_cells} cells cannot be coarsened")));
    }
    let nc = fine_cells / 2;
    let (rows, cols, taps): (usize, usize, Vec<(isize, f64)>) = match kind {
        Restriction1d::Nodal121 => {
            let (r, c) = if periodic { (nc, fine_cells) } else { (nc + 1, fine_cells + 1) };
            (r, c, vec![(-1, 0.25), (0, 0.5), (1, 0.25)])
        }
        Restriction1d::Cell1331 => (nc, fine_cells, vec![(-1, 0.125), (0, 0.375), (1, 0.375), (2, 0.125)]),
        Restriction1d::Cell11 => (nc, fine_cells, vec![(0, 0.5), (1, 0.5)]),
    };
    let mut trips = Vec::with_capacity(rows * taps.len());
    for j in 0..rows {
        for &(off, w) in &taps {
            let f = 2 * j as isize + off;
            let f = if periodic {
                f.rem_euclid(cols as isize)
            } else if f < 0 || f >= cols as isize {
                continue;
            } else {
                f
            };
            trips.push((j, f as usize, C64::new(w, 0.0)));
        }
    }
    Ok(CsrMatrix::from_triplets(rows, cols, trips))
}

/// Kronecker product of per-axis operators, axis 0 fastest.
pub fn kron_axes(ops: &[CsrMatrix]) -> CsrMatrix {
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = op.kron(&acc);
    }
    acc
}

/// Two-operand helper: the 2D operator for `rx` along x and `ry` along y.
pub fn kron1d(rx: &CsrMatrix, ry: &CsrMatrix) -> CsrMatrix {
    ry.kron(rx)
}

/// Restriction family choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Intergrid {
    /// `[1 2 1]` nodal and `[1 3 3 1]` cell stencils; `P = 2Rᵀ`.
    #[default]
    Full,
    /// `[1 2 1]` nodal and `[1 1]` cell stencils for `R`; `P` as for `Full`.
    Mixed,
}

/// Restriction of a staggered layout: product of 1D stencils chosen per
/// axis by whether the layout is nodal there.
pub fn layout_restriction(layout: &Layout, cell_kind: Restriction1d) -> Result<CsrMatrix> {
    let mut ops = Vec::with_capacity(layout.dim);
    for a in 0..layout.dim {
        let kind = if layout.nodal[a] { Restriction1d::Nodal121 } else { cell_kind };
        ops.push(build_restriction_1d(kind, layout.cells[a], layout.periodic)?);
    }
    Ok(kron_axes(&ops))
}

/// `(R, P)` for one layout.
pub fn transfer_pair(layout: &Layout, intergrid: Intergrid) -> Result<(CsrMatrix, CsrMatrix)> {
    let full = layout_restriction(layout, Restriction1d::Cell1331)?;
    let p = full.transpose().scale(C64::new(2.0, 0.0));
    let r = match intergrid {
        Intergrid::Full => full,
        Intergrid::Mixed => layout_restriction(layout, Restriction1d::Cell11)?,
    };
    Ok((r, p))
}
