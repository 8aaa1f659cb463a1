use num_complex::Complex64;

use crate::grid::{Grid, Layout};
use crate::sparse::CsrMatrix;

type C64 = Complex64;

/// First difference along `axis`, mapping `layout` to its toggled layout.
///
/// Cell to nodal: `(u(i) - u(i-1)) / h` with zero ghosts outside the
/// domain. Nodal to cell: `(u(i+1) - u(i)) / h`. Periodic layouts wrap.
pub fn derivative(layout: &Layout, axis: usize, h: f64) -> (CsrMatrix, Layout) {
    let out = layout.toggled(axis);
    let n = layout.cells[axis] as isize;
    let ext = layout.ext(axis) as isize;
    let w = 1.0 / h;
    let mut trips = Vec::with_capacity(2 * out.len());
    for r in 0..out.len() {
        let c = out.coords(r);
        let i = c[axis] as isize;
        let taps: [(isize, f64); 2] = if layout.nodal[axis] { [(i, -w), (i + 1, w)] } else { [(i - 1, -w), (i, w)] };
        for (k, v) in taps {
            let k = if layout.periodic {
                k.rem_euclid(n)
            } else if k < 0 || k >= ext {
                continue;
            } else {
                k
            };
            let mut ci = c;
            ci[axis] = k as usize;
            trips.push((r, layout.index(ci), C64::new(v, 0.0)));
        }
    }
    (CsrMatrix::from_triplets(out.len(), layout.len(), trips), out)
}

/// Averages cell values onto `target`: for every axis where the target is
/// nodal, the mean over the adjacent cells that exist.
pub fn average_cells_to(grid: &Grid, target: &Layout) -> CsrMatrix {
    let cells = grid.cell_layout();
    let mut trips = Vec::new();
    for r in 0..target.len() {
        let c = target.coords(r);
        let mut picks: Vec<[usize; 3]> = vec![c];
        for a in 0..grid.dim {
            if !target.nodal[a] {
                continue;
            }
            let n = grid.cells[a] as isize;
            let mut next = Vec::with_capacity(picks.len() * 2);
            for p in &picks {
                for k in [p[a] as isize - 1, p[a] as isize] {
                    let k = if grid.periodic {
                        k.rem_euclid(n)
                    } else if k < 0 || k >= n {
                        continue;
                    } else {
                        k
                    };
                    let mut q = *p;
                    q[a] = k as usize;
                    next.push(q);
                }
            }
            picks = next;
        }
        let w = 1.0 / picks.len() as f64;
        for p in picks {
            trips.push((r, cells.index(p), C64::new(w, 0.0)));
        }
    }
    CsrMatrix::from_triplets(target.len(), cells.len(), trips)
}

/// Applies a real averaging operator to a real cell field.
pub fn average_field(avg: &CsrMatrix, field: &[f64]) -> Vec<f64> {
    (0..avg.nrows()).map(|r| avg.row(r).map(|(c, w)| w.re * field[c]).sum()).collect()
}

/// Per-component gradients `G_k`: cells to the faces normal to axis `k`.
pub fn gradient_blocks(grid: &Grid) -> Vec<CsrMatrix> {
    let cells = grid.cell_layout();
    (0..grid.dim).map(|k| derivative(&cells, k, grid.spacing[k]).0).collect()
}

/// Discrete gradient `G` (all faces by cells); the divergence block is `Gᵀ`.
pub fn build_gradient(grid: &Grid) -> CsrMatrix {
    let blocks = gradient_blocks(grid);
    let refs: Vec<&CsrMatrix> = blocks.iter().collect();
    CsrMatrix::vstack(&refs).expect("gradient blocks share the cell column space")
}

/// Averaging maps: `faces[k]` to component `k` faces and `derivs[k][l]` to
/// the location of the `l`-derivative of component `k` (identity when that
/// location is the cell centre).
#[derive(Debug, Clone)]
pub struct Averaging {
    pub faces: Vec<CsrMatrix>,
    pub derivs: Vec<Vec<CsrMatrix>>,
}

pub fn build_averaging(grid: &Grid) -> Averaging {
    let faces = (0..grid.dim).map(|k| average_cells_to(grid, &grid.face_layout(k))).collect();
    let derivs = (0..grid.dim)
        .map(|k| {
            let f = grid.face_layout(k);
            (0..grid.dim).map(|l| average_cells_to(grid, &f.toggled(l))).collect()
        })
        .collect();
    Averaging { faces, derivs }
}

/// Cell field averaged onto all faces, components concatenated.
pub fn face_average(grid: &Grid, field: &[f64]) -> Vec<f64> {
    (0..grid.dim).flat_map(|k| average_field(&average_cells_to(grid, &grid.face_layout(k)), field)).collect()
}

/// `Σ_l D_lᵀ diag(A μ) D_l` on the faces of component `k`.
pub fn weighted_laplacian(grid: &Grid, k: usize, mu: &[f64]) -> CsrMatrix {
    let f = grid.face_layout(k);
    let mut acc: Option<CsrMatrix> = None;
    for l in 0..grid.dim {
        let (d, out) = derivative(&f, l, grid.spacing[l]);
        let w = average_field(&average_cells_to(grid, &out), mu);
        let w: Vec<C64> = w.into_iter().map(|v| C64::new(v, 0.0)).collect();
        let term = d.transpose().scale_cols(&w).matmul(&d).expect("derivative shapes chain");
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term).expect("same face layout"),
        });
    }
    acc.expect("at least two axes")
}
