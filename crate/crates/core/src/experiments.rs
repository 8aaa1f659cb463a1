//! Problem setup and preconditioned solves shared by the CLI and the
//! acceptance suite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretize::{point_source, SaddleSystem};
use crate::error::Result;
use crate::krylov::{krylov_solve, KrylovConfig, SolverReport};
use crate::linop::{Identity, LinearMap};
use crate::media::{apply_abc, builtin_media, select_omega, AbcParams, BuiltinMedia, MediaModel, OmegaSelection};
use crate::multigrid::HierarchyConfig;
use crate::precond::{monolithic_preconditioner, BlockPrec, BlockPrecConfig, BlockSolveMode, SchurKind};
use crate::sparse::FlopLedger;

type C64 = Complex64;

/// Assembled system with its point-source right-hand side.
#[derive(Debug, Clone)]
pub struct Problem {
    pub sys: SaddleSystem,
    pub rhs: Vec<C64>,
    pub omega: OmegaSelection,
}

impl Problem {
    /// Applies the sponge layer (fitted to small grids), picks ω from
    /// `gs_target` and assembles.
    pub fn from_media(media: &MediaModel, gs_target: f64, abc: Option<&AbcParams>) -> Result<Self> {
        let media = match abc {
            Some(p) => apply_abc(media, &p.fitted(&media.grid))?,
            None => media.clone(),
        };
        let omega = select_omega(&media, gs_target)?;
        let sys = SaddleSystem::assemble(&media, omega.omega)?;
        let rhs = point_source(&sys.grid);
        Ok(Self { sys, rhs, omega })
    }

    pub fn builtin(name: BuiltinMedia, cells: &[usize], lambda_factor: f64, gs_target: f64) -> Result<Self> {
        Self::from_media(&builtin_media(name, cells, lambda_factor)?, gs_target, Some(&AbcParams::default()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecChoice {
    BlockAcoustic,
    Monolithic,
    Fp,
    Bfbt,
    None,
}

impl std::str::FromStr for PrecChoice {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block-acoustic" => Ok(Self::BlockAcoustic),
            "monolithic" => Ok(Self::Monolithic),
            "fp" => Ok(Self::Fp),
            "bfbt" => Ok(Self::Bfbt),
            "none" => Ok(Self::None),
            _ => Err(crate::Error::Config(format!("unknown preconditioner '{s}'"))),
        }
    }
}

/// Everything that selects a preconditioned Krylov run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSetup {
    pub preconditioner: PrecChoice,
    pub block_solve: BlockSolveMode,
    pub hierarchy: HierarchyConfig,
    pub krylov: KrylovConfig,
}

impl SolveSetup {
    /// Block-acoustic with exact block solves.
    pub fn direct(preconditioner: PrecChoice, krylov: KrylovConfig) -> Self {
        Self { preconditioner, block_solve: BlockSolveMode::Direct, hierarchy: HierarchyConfig::block_default(1, 0.0), krylov }
    }

    /// Block-acoustic with per-block multigrid cycles.
    pub fn block_multigrid(dim: usize, levels: usize, alpha: f64, krylov: KrylovConfig) -> Self {
        let hierarchy = if dim == 3 {
            HierarchyConfig::block_default_3d(levels, alpha)
        } else {
            HierarchyConfig::block_default(levels, alpha)
        };
        Self { preconditioner: PrecChoice::BlockAcoustic, block_solve: BlockSolveMode::Multigrid, hierarchy, krylov }
    }

    pub fn monolithic(levels: usize, alpha: f64, krylov: KrylovConfig) -> Self {
        Self {
            preconditioner: PrecChoice::Monolithic,
            block_solve: BlockSolveMode::Multigrid,
            hierarchy: HierarchyConfig::monolithic_default(levels, alpha),
            krylov,
        }
    }
}

/// A built preconditioner together with its direct-factor size.
pub struct BuiltPrec {
    pub op: Box<dyn LinearMap>,
    pub factor_nnz: usize,
}

pub fn build_preconditioner(sys: &SaddleSystem, setup: &SolveSetup) -> Result<BuiltPrec> {
    let block = |schur| BlockPrecConfig {
        schur,
        mode: setup.block_solve,
        hierarchy: setup.hierarchy.clone(),
        ap_variant: Default::default(),
    };
    Ok(match setup.preconditioner {
        PrecChoice::None => BuiltPrec { op: Box::new(Identity(sys.size())), factor_nnz: 0 },
        PrecChoice::Monolithic => {
            let h = monolithic_preconditioner(sys, &setup.hierarchy)?;
            BuiltPrec { factor_nnz: h.coarse_nnz(), op: Box::new(h) }
        }
        PrecChoice::BlockAcoustic | PrecChoice::Fp | PrecChoice::Bfbt => {
            let schur = match setup.preconditioner {
                PrecChoice::Fp => SchurKind::Fp,
                PrecChoice::Bfbt => SchurKind::Bfbt,
                _ => SchurKind::BlockAcoustic,
            };
            let p = BlockPrec::new(sys, &block(schur))?;
            BuiltPrec { factor_nnz: p.factor_nnz(), op: Box::new(p) }
        }
    })
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<C64>,
    pub report: SolverReport,
    pub factor_nnz: usize,
    pub n_cells: usize,
}

impl SolveOutcome {
    /// Total work: ledger operations plus coarse factor applications.
    pub fn total_flops(&self) -> u64 {
        self.report.flops.total()
    }
}

pub fn solve(problem: &Problem, setup: &SolveSetup) -> Result<SolveOutcome> {
    setup.krylov.validate()?;
    setup.hierarchy.smoother.validate()?;
    let prec = build_preconditioner(&problem.sys, setup)?;
    let k = problem.sys.matrix();
    let ledger = FlopLedger::new();
    let (x, report) = krylov_solve(&k, prec.op.as_ref(), &problem.rhs, &setup.krylov, &ledger)?;
    Ok(SolveOutcome { x, report, factor_nnz: prec.factor_nnz, n_cells: problem.sys.m })
}

/// One preconditioner application's cost per cell, split into smoothing
/// and intergrid work and coarse-factor work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleCost {
    pub cycle_per_cell: f64,
    pub coarse_per_cell: f64,
}

pub fn cycle_cost(problem: &Problem, setup: &SolveSetup) -> Result<CycleCost> {
    let prec = build_preconditioner(&problem.sys, setup)?;
    let ledger = FlopLedger::new();
    prec.op.apply(&problem.rhs, &ledger);
    let s = ledger.snapshot();
    let m = problem.sys.m as f64;
    Ok(CycleCost { cycle_per_cell: s.ops as f64 / m, coarse_per_cell: s.coarse as f64 / m })
}

/// Shift defaults per level count for the linear model.
pub fn default_alpha(levels: usize) -> f64 {
    match levels {
        0..=2 => 0.1,
        3 => 0.2,
        _ => 0.4,
    }
}
