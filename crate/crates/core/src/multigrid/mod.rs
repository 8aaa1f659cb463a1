//! Geometric multigrid on staggered layouts.

pub mod intergrid;
pub mod smoother;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use intergrid::{build_restriction_1d, kron1d, kron_axes, transfer_pair, Intergrid, Restriction1d};
pub use smoother::{inverse_diagonal, jacobi_sweep, SmootherKind, SmootherParams, Vanka};

use crate::discretize::apply_shift;
use crate::error::{Error, Result};
use crate::grid::{Grid, Layout};
use crate::linop::LinearMap;
use crate::sparse::ordering::{order_by_coords, priority_for_extents};
use crate::sparse::{triple_product, CsrMatrix, DirectSolver, FlopLedger};

type C64 = Complex64;

/// Unknown families stacked in one vector, e.g. a single face family for an
/// acoustic block or (faces..., cells) for the monolithic system. When
/// Vanka is used the cell family must come last.
#[derive(Debug, Clone, PartialEq)]
pub struct Families {
    pub layouts: Vec<Layout>,
    pub offsets: Vec<usize>,
}

impl Families {
    pub fn new(layouts: Vec<Layout>) -> Self {
        let mut offsets = vec![0];
        for l in &layouts {
            offsets.push(offsets.last().unwrap() + l.len());
        }
        Self { layouts, offsets }
    }

    pub fn single(layout: Layout) -> Self {
        Self::new(vec![layout])
    }

    /// All faces followed by cells.
    pub fn saddle(grid: &Grid) -> Self {
        let mut l: Vec<Layout> = (0..grid.dim).map(|k| grid.face_layout(k)).collect();
        l.push(grid.cell_layout());
        Self::new(l)
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coarsened(&self) -> Self {
        Self::new(self.layouts.iter().map(|l| l.coarsened()).collect())
    }

    pub fn transfers(&self, intergrid: Intergrid) -> Result<(CsrMatrix, CsrMatrix)> {
        let mut rs = Vec::new();
        let mut ps = Vec::new();
        for l in &self.layouts {
            let (r, p) = transfer_pair(l, intergrid)?;
            rs.push(r);
            ps.push(p);
        }
        let rr: Vec<&CsrMatrix> = rs.iter().collect();
        let pr: Vec<&CsrMatrix> = ps.iter().collect();
        Ok((CsrMatrix::block_diag(&rr), CsrMatrix::block_diag(&pr)))
    }

    /// Ordering that interleaves families by position with the longest axis
    /// slowest, keeping the bandwidth proportional to the short axes.
    pub fn band_ordering(&self) -> Vec<usize> {
        let l0 = self.layouts[0];
        let mut coords = Vec::with_capacity(self.len());
        for l in &self.layouts {
            for i in 0..l.len() {
                let c = l.coords(i);
                let mut p = [0.0; 3];
                for a in 0..l.dim {
                    p[a] = c[a] as f64 + if l.nodal[a] { 0.0 } else { 0.5 };
                }
                coords.push(p);
            }
        }
        order_by_coords(&coords, priority_for_extents(l0.cells, l0.dim))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleKind {
    V,
    W,
}

impl CycleKind {
    fn recursions(self) -> usize {
        match self {
            Self::V => 1,
            Self::W => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub levels: usize,
    pub intergrid: Intergrid,
    pub smoother: SmootherParams,
    pub cycle: CycleKind,
    pub nu1: usize,
    pub nu2: usize,
    pub alpha: f64,
}

impl HierarchyConfig {
    /// Per-block CSLP default: W(1,2) damped Jacobi, full-weighting transfers.
    pub fn block_default(levels: usize, alpha: f64) -> Self {
        Self {
            levels,
            intergrid: Intergrid::Full,
            smoother: SmootherParams::jacobi(),
            cycle: CycleKind::W,
            nu1: 1,
            nu2: 2,
            alpha,
        }
    }

    /// Three-dimensional per-block default: mixed transfers, W(2,2).
    pub fn block_default_3d(levels: usize, alpha: f64) -> Self {
        Self {
            levels,
            intergrid: Intergrid::Mixed,
            smoother: SmootherParams::jacobi_3d(),
            cycle: CycleKind::W,
            nu1: 2,
            nu2: 2,
            alpha,
        }
    }

    /// Monolithic default: W(1,1) red-black Vanka with mixed transfers.
    pub fn monolithic_default(levels: usize, alpha: f64) -> Self {
        Self {
            levels,
            intergrid: Intergrid::Mixed,
            smoother: SmootherParams::vanka(),
            cycle: CycleKind::W,
            nu1: 1,
            nu2: 1,
            alpha,
        }
    }
}

#[derive(Debug, Clone)]
enum LevelSmoother {
    Jacobi(Vec<C64>),
    Vanka(Vanka),
}

#[derive(Debug, Clone)]
pub struct Level {
    pub op: CsrMatrix,
    pub r: CsrMatrix,
    pub p: CsrMatrix,
    pub damping: f64,
    smoother: LevelSmoother,
}

/// Galerkin hierarchy on a shifted operator with a factored coarsest level.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    pub levels: Vec<Level>,
    pub coarse_op: CsrMatrix,
    coarse: DirectSolver,
    cfg: HierarchyConfig,
}

impl MgHierarchy {
    /// Builds the hierarchy on `op + iαω² diag(shift_mass)`.
    pub fn build(op: &CsrMatrix, shift_mass: &[f64], omega: f64, fam: &Families, cfg: &HierarchyConfig) -> Result<Self> {
        cfg.smoother.validate()?;
        if fam.len() != op.nrows() {
            return Err(Error::Dimension(format!("families hold {} unknowns, operator has {}", fam.len(), op.nrows())));
        }
        if cfg.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        let div = 1usize << (cfg.levels - 1);
        let l0 = fam.layouts[0];
        for a in 0..l0.dim {
            if !l0.cells[a].is_multiple_of(div) {
                return Err(Error::Grid(format!(
                    "axis {a} has {} cells, not divisible by {div} for {} levels",
                    l0.cells[a], cfg.levels
                )));
            }
        }
        let mut cur = apply_shift(op, shift_mass, cfg.alpha, omega)?;
        let mut fam = fam.clone();
        let mut levels = Vec::with_capacity(cfg.levels - 1);
        for lvl in 0..cfg.levels - 1 {
            let (r, p) = fam.transfers(cfg.intergrid)?;
            let smoother = match cfg.smoother.kind {
                SmootherKind::Jacobi => LevelSmoother::Jacobi(inverse_diagonal(&cur)?),
                SmootherKind::VankaRb => LevelSmoother::Vanka(Vanka::new(&cur, &fam)?),
            };
            let coarse = triple_product(&r, &cur, &p)?;
            levels.push(Level { op: cur, r, p, damping: cfg.smoother.damping_at(lvl), smoother });
            cur = coarse;
            fam = fam.coarsened();
        }
        let coarse = DirectSolver::new(&cur, Some(&fam.band_ordering()))?;
        Ok(Self { levels, coarse_op: cur, coarse, cfg: cfg.clone() })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.levels.first().map(|l| l.op.nrows()).unwrap_or(self.coarse_op.nrows())
    }

    /// Nonzeros of the coarsest factorization.
    pub fn coarse_nnz(&self) -> usize {
        self.coarse.factor_nnz()
    }

    /// The finest (shifted) operator.
    pub fn finest(&self) -> &CsrMatrix {
        self.levels.first().map(|l| &l.op).unwrap_or(&self.coarse_op)
    }

    /// One cycle for `H x = b` from `x0` (zero when `None`).
    pub fn cycle(&self, b: &[C64], x0: Option<&[C64]>, ledger: &FlopLedger) -> Vec<C64> {
        let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![C64::new(0.0, 0.0); b.len()]);
        self.cycle_at(0, b, &mut x, ledger);
        x
    }

    fn coarse_solve(&self, b: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        ledger.charge_coarse(self.coarse.factor_nnz());
        self.coarse.solve(b)
    }

    fn smooth(&self, lvl: &Level, x: &mut [C64], b: &[C64], ledger: &FlopLedger) {
        match &lvl.smoother {
            LevelSmoother::Jacobi(dinv) => jacobi_sweep(&lvl.op, dinv, x, b, lvl.damping, ledger),
            LevelSmoother::Vanka(v) => v.sweep(&lvl.op, x, b, lvl.damping, ledger),
        }
    }

    fn cycle_at(&self, l: usize, b: &[C64], x: &mut Vec<C64>, ledger: &FlopLedger) {
        if l == self.levels.len() {
            *x = self.coarse_solve(b, ledger);
            return;
        }
        let lvl = &self.levels[l];
        for _ in 0..self.cfg.nu1 {
            self.smooth(lvl, x, b, ledger);
        }
        let mut r = vec![C64::new(0.0, 0.0); b.len()];
        lvl.op.residual_into(b, x, &mut r);
        ledger.charge(lvl.op.nnz());
        ledger.charge(lvl.r.nnz());
        let rc = lvl.r.mul_vec(&r);
        let mut ec = vec![C64::new(0.0, 0.0); rc.len()];
        let calls = if l + 1 == self.levels.len() { 1 } else { self.cfg.cycle.recursions() };
        for _ in 0..calls {
            self.cycle_at(l + 1, &rc, &mut ec, ledger);
        }
        ledger.charge(lvl.p.nnz());
        let corr = lvl.p.mul_vec(&ec);
        x.iter_mut().zip(&corr).for_each(|(xi, ci)| *xi += ci);
        for _ in 0..self.cfg.nu2 {
            self.smooth(lvl, x, b, ledger);
        }
    }
}

impl LinearMap for MgHierarchy {
    fn dim(&self) -> usize {
        MgHierarchy::dim(self)
    }

    fn apply(&self, x: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        self.cycle(x, None, ledger)
    }
}
