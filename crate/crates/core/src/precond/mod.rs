//! Block-triangular preconditioners for the mixed system and the Z operator.

mod theorem;

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use theorem::{build_t_and_verify, dense_t, TheoremReport, ZOperator};

use crate::discretize::{apply_shift, build_ap, build_hp, ApVariant, SaddleSystem};
use crate::error::{Error, Result};
use crate::linop::LinearMap;
use crate::multigrid::{Families, HierarchyConfig, MgHierarchy};
use crate::sparse::{CsrMatrix, DirectSolver, FlopLedger};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSolveMode {
    #[default]
    Direct,
    Multigrid,
}

/// Inner solver for one diagonal block.
#[derive(Debug, Clone)]
pub enum BlockSolver {
    Direct(DirectSolver),
    Multigrid(MgHierarchy),
}

impl BlockSolver {
    /// Direct factorization of the α-shifted operator, or a hierarchy on it.
    pub fn build(
        op: &CsrMatrix,
        shift_mass: &[f64],
        omega: f64,
        fam: &Families,
        mode: BlockSolveMode,
        cfg: &HierarchyConfig,
    ) -> Result<Self> {
        match mode {
            BlockSolveMode::Direct => {
                let shifted = apply_shift(op, shift_mass, cfg.alpha, omega)?;
                Ok(Self::Direct(DirectSolver::new(&shifted, Some(&fam.band_ordering()))?))
            }
            BlockSolveMode::Multigrid => Ok(Self::Multigrid(MgHierarchy::build(op, shift_mass, omega, fam, cfg)?)),
        }
    }

    pub fn solve(&self, b: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        match self {
            Self::Direct(d) => {
                ledger.charge_coarse(d.factor_nnz());
                d.solve(b)
            }
            Self::Multigrid(h) => h.cycle(b, None, ledger),
        }
    }

    /// Nonzeros of the factor used for the coarsest (or only) solve.
    pub fn factor_nnz(&self) -> usize {
        match self {
            Self::Direct(d) => d.factor_nnz(),
            Self::Multigrid(h) => h.coarse_nnz(),
        }
    }
}

/// Choice of the lower-right block of the triangular preconditioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchurKind {
    /// `H_p` applied after the distributor `[[I, 0], [Gᵀ, -A_p]]`.
    BlockAcoustic,
    /// `S̃⁻¹ = A_p (GᵀG)⁻¹`.
    Fp,
    /// `S̃⁻¹ = (GᵀG)⁻¹ (GᵀAG) (GᵀG)⁻¹`.
    Bfbt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPrecConfig {
    pub schur: SchurKind,
    pub mode: BlockSolveMode,
    pub hierarchy: HierarchyConfig,
    pub ap_variant: ApVariant,
}

impl BlockPrecConfig {
    /// Direct block solves without shift.
    pub fn direct(schur: SchurKind) -> Self {
        Self {
            schur,
            mode: BlockSolveMode::Direct,
            hierarchy: HierarchyConfig::block_default(1, 0.0),
            ap_variant: ApVariant::RightWeighted,
        }
    }

    /// Per-block CSLP cycles with the dimension's defaults.
    pub fn multigrid(schur: SchurKind, dim: usize, levels: usize, alpha: f64) -> Self {
        let hierarchy = if dim == 3 {
            HierarchyConfig::block_default_3d(levels, alpha)
        } else {
            HierarchyConfig::block_default(levels, alpha)
        };
        Self { schur, mode: BlockSolveMode::Multigrid, hierarchy, ap_variant: ApVariant::RightWeighted }
    }
}

#[derive(Debug, Clone)]
enum Lower {
    Hp(BlockSolver),
    Fp { poisson: DirectSolver },
    Bfbt { poisson: DirectSolver, a: CsrMatrix },
}

/// Block upper-triangular preconditioner for `[[A, G], [Gᵀ, -C]]`.
#[derive(Debug, Clone)]
pub struct BlockPrec {
    n: usize,
    m: usize,
    offsets: Vec<usize>,
    g: CsrMatrix,
    gt: CsrMatrix,
    ap: CsrMatrix,
    a_solvers: Vec<BlockSolver>,
    lower: Lower,
    schur: SchurKind,
}

impl BlockPrec {
    pub fn new(sys: &SaddleSystem, cfg: &BlockPrecConfig) -> Result<Self> {
        let grid = &sys.grid;
        let ap = build_ap(sys, cfg.ap_variant);
        let mut a_solvers = Vec::with_capacity(grid.dim);
        for k in 0..grid.dim {
            let fam = Families::single(grid.face_layout(k));
            a_solvers.push(BlockSolver::build(&sys.blocks[k], sys.block_shift_mass(k), sys.omega, &fam, cfg.mode, &cfg.hierarchy)?);
        }
        let cells = Families::single(grid.cell_layout());
        let lower = match cfg.schur {
            SchurKind::BlockAcoustic => {
                let hp = build_hp(sys, &ap);
                Lower::Hp(BlockSolver::build(&hp, &sys.hp_shift_mass(), sys.omega, &cells, cfg.mode, &cfg.hierarchy)?)
            }
            SchurKind::Fp | SchurKind::Bfbt => {
                let gtg = sys.gt.matmul(&sys.g)?;
                let poisson = DirectSolver::new(&gtg, Some(&cells.band_ordering()))?;
                if cfg.schur == SchurKind::Fp {
                    Lower::Fp { poisson }
                } else {
                    Lower::Bfbt { poisson, a: sys.a() }
                }
            }
        };
        Ok(Self {
            n: sys.n,
            m: sys.m,
            offsets: sys.face_offsets.clone(),
            g: sys.g.clone(),
            gt: sys.gt.clone(),
            ap,
            a_solvers,
            lower,
            schur: cfg.schur,
        })
    }

    pub fn schur(&self) -> SchurKind {
        self.schur
    }

    /// Nonzeros of all coarsest-level (or direct) factors.
    pub fn factor_nnz(&self) -> usize {
        let mut s: usize = self.a_solvers.iter().map(|b| b.factor_nnz()).sum();
        s += match &self.lower {
            Lower::Hp(b) => b.factor_nnz(),
            Lower::Fp { poisson } | Lower::Bfbt { poisson, .. } => poisson.factor_nnz(),
        };
        s
    }

    fn solve_displacements(&self, w: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        let solve = |k: usize| self.a_solvers[k].solve(&w[self.offsets[k]..self.offsets[k + 1]], ledger);
        #[cfg(feature = "parallel")]
        let parts: Vec<Vec<C64>> = (0..self.a_solvers.len()).into_par_iter().map(solve).collect();
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Vec<C64>> = (0..self.a_solvers.len()).map(solve).collect();
        parts.concat()
    }

    fn solve_pressure(&self, r_u: &[C64], r_p: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        match &self.lower {
            Lower::Hp(hp) => {
                // distributed right-hand side Gᵀ r_u - A_p r_p
                ledger.charge(self.gt.nnz() + self.ap.nnz());
                let a = self.gt.mul_vec(r_u);
                let b = self.ap.mul_vec(r_p);
                let t: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                hp.solve(&t, ledger)
            }
            Lower::Fp { poisson } => {
                ledger.charge_coarse(poisson.factor_nnz());
                ledger.charge(self.ap.nnz());
                let y = poisson.solve(r_p);
                self.ap.mul_vec(&y).into_iter().map(|v| -v).collect()
            }
            Lower::Bfbt { poisson, a } => {
                ledger.charge_coarse(2 * poisson.factor_nnz());
                ledger.charge(self.g.nnz() + a.nnz() + self.gt.nnz());
                let y = poisson.solve(r_p);
                let y = self.gt.mul_vec(&a.mul_vec(&self.g.mul_vec(&y)));
                poisson.solve(&y).into_iter().map(|v| -v).collect()
            }
        }
    }
}

impl LinearMap for BlockPrec {
    fn dim(&self) -> usize {
        self.n + self.m
    }

    fn apply(&self, r: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        let (r_u, r_p) = r.split_at(self.n);
        let e_p = self.solve_pressure(r_u, r_p, ledger);
        ledger.charge(self.g.nnz());
        let ge = self.g.mul_vec(&e_p);
        let w: Vec<C64> = r_u.iter().zip(&ge).map(|(a, b)| a - b).collect();
        let mut e = self.solve_displacements(&w, ledger);
        e.extend(e_p);
        e
    }
}

/// Monolithic multigrid on the saddle system with the shift on the leading
/// block only.
pub fn monolithic_preconditioner(sys: &SaddleSystem, cfg: &HierarchyConfig) -> Result<MgHierarchy> {
    if cfg.smoother.kind != crate::multigrid::SmootherKind::VankaRb && cfg.smoother.kind != crate::multigrid::SmootherKind::Jacobi {
        return Err(Error::Config("unsupported smoother".into()));
    }
    let mut mass = sys.rho_faces.clone();
    mass.resize(sys.size(), 0.0);
    MgHierarchy::build(&sys.matrix(), &mass, sys.omega, &Families::saddle(&sys.grid), cfg)
}
