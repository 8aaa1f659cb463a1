//! Spectra of Z, shift sweeps and per-cycle cost tables.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretize::{ApVariant, SaddleSystem};
use crate::error::{Error, Result};
use crate::experiments::{cycle_cost, Problem, SolveSetup};
use crate::krylov::KrylovConfig;
use crate::media::{apply_abc, AbcParams, MediaModel};
use crate::precond::ZOperator;
use crate::sparse::{dense_eig_capped, PowerEstimate};

type C64 = Complex64;

/// Largest slice accepted by [`spectrum_of_z`]: a 50×50 slice gives a
/// 2500×2500 dense Z.
pub const SPECTRUM_CAP: usize = 2500;

/// Top-left sub-model of `cells` with the sponge layer rebuilt for its size.
/// Heterogeneity below or right of the slice is lost.
pub fn slice_media(media: &MediaModel, cells: &[usize], abc: &AbcParams) -> Result<MediaModel> {
    let s = media.slice(cells)?;
    if s.grid.periodic {
        return Ok(s);
    }
    apply_abc(&s, &abc.fitted(&s.grid))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub media: String,
    pub cells: Vec<usize>,
    pub gs: f64,
    pub shift: f64,
    pub eigenvalues: Vec<C64>,
}

impl SpectrumReport {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "re,im")?;
        for v in &self.eigenvalues {
            writeln!(w, "{:e},{:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Eigenvalues of the dense Z of `media` at `omega`, formed column by
/// column.
pub fn spectrum_of_z(name: &str, media: &MediaModel, omega: f64, shift: f64) -> Result<SpectrumReport> {
    let m = media.grid.n_cells();
    if m > SPECTRUM_CAP {
        return Err(Error::Capacity(format!("Z would be {m}×{m}; the cap is {SPECTRUM_CAP} cells")));
    }
    let sys = SaddleSystem::assemble(media, omega)?;
    let z = ZOperator::new(&sys, shift, ApVariant::RightWeighted)?;
    let eigenvalues = dense_eig_capped(&z.dense(), SPECTRUM_CAP)?;
    let (_, vs) = media.velocities();
    let min_vs = vs.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    Ok(SpectrumReport {
        media: name.to_string(),
        cells: media.grid.cells[..media.grid.dim].to_vec(),
        gs: 2.0 * PI * min_vs / (omega * media.grid.max_spacing()),
        shift,
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power-method estimate of ρ(Z_α) for each shift, refactoring the shifted
/// blocks every time.
pub fn rho_z_sweep(sys: &SaddleSystem, shifts: &[f64], tol: f64, max_iter: usize, seed: u64) -> Result<Vec<SweepPoint>> {
    shifts
        .iter()
        .map(|&alpha| {
            let z = ZOperator::new(sys, alpha, ApVariant::RightWeighted)?;
            let PowerEstimate { rho, iterations, converged } = z.spectral_radius(tol, max_iter, seed);
            Ok(SweepPoint { alpha, rho, iterations, converged })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "alpha,rho")?;
    for p in points {
        writeln!(w, "{},{:e}", p.alpha, p.rho)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopRow {
    pub method: String,
    pub cells: Vec<usize>,
    pub levels: usize,
    /// Smoothing, residual, transfer and distribution work per cell.
    pub cycle_per_cell: f64,
    /// Nonzeros of all coarsest-level factors per cell.
    pub coarse_nnz_per_cell: f64,
    pub total_per_cell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlopTable {
    pub rows: Vec<FlopRow>,
}

impl FlopTable {
    /// Monolithic over block-acoustic coarse nnz for the first matching pair.
    pub fn coarse_ratio(&self) -> Option<f64> {
        let block = self.rows.iter().find(|r| r.method == "block-acoustic")?;
        let mono = self.rows.iter().find(|r| r.method == "monolithic" && r.levels == block.levels)?;
        Some(mono.coarse_nnz_per_cell / block.coarse_nnz_per_cell)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "method,grid,levels,cycle_per_cell,coarse_nnz_per_cell,total_per_cell")?;
        for r in &self.rows {
            let grid: Vec<String> = r.cells.iter().map(|c| c.to_string()).collect();
            writeln!(
                w,
                "{},{},{},{:.2},{:.2},{:.2}",
                r.method,
                grid.join("x"),
                r.levels,
                r.cycle_per_cell,
                r.coarse_nnz_per_cell,
                r.total_per_cell
            )?;
        }
        Ok(())
    }
}

/// Per-cycle cost of block-acoustic and monolithic multigrid for each
/// level count on `problem`.
pub fn flop_table(problem: &Problem, levels: &[usize], alpha: f64) -> Result<FlopTable> {
    let dim = problem.sys.dim();
    let mut rows = Vec::new();
    for &l in levels {
        let setups = [
            ("block-acoustic", SolveSetup::block_multigrid(dim, l, alpha, KrylovConfig::restarted(5))),
            ("monolithic", SolveSetup::monolithic(l, alpha, KrylovConfig::restarted(5))),
        ];
        for (name, setup) in setups {
            let c = cycle_cost(problem, &setup)?;
            rows.push(FlopRow {
                method: name.to_string(),
                cells: problem.sys.grid.cells[..dim].to_vec(),
                levels: l,
                cycle_per_cell: c.cycle_per_cell,
                coarse_nnz_per_cell: c.coarse_per_cell,
                total_per_cell: c.cycle_per_cell + c.coarse_per_cell,
            });
        }
    }
    Ok(FlopTable { rows })
}
