use std::path::{Path, PathBuf};

use helmstack::experiments::{PrecChoice, SolveSetup};
use helmstack::krylov::KrylovConfig;
use helmstack::media::AbcParams;
use helmstack::multigrid::{CycleKind, HierarchyConfig};
use helmstack::precond::BlockSolveMode;
use serde::{Deserialize, Serialize};

/// Everything that defines one solve. Unset cycle parameters take the
/// chosen method's defaults and are filled in when echoed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in model name (`homogeneous`, `linear`) or an EHGRID path.
    pub media: String,
    /// Cell counts for built-in media; taken from the file otherwise.
    pub grid: Vec<usize>,
    pub levels: usize,
    pub alpha: f64,
    pub preconditioner: PrecChoice,
    pub block_solve: BlockSolveMode,
    pub cycle: Option<CycleKind>,
    pub nu1: Option<usize>,
    pub nu2: Option<usize>,
    pub krylov: KrylovConfig,
    pub gs_target: f64,
    pub lambda_factor: f64,
    pub abc: AbcParams,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            media: "homogeneous".into(),
            grid: vec![64, 32],
            levels: 2,
            alpha: 0.1,
            preconditioner: PrecChoice::BlockAcoustic,
            block_solve: BlockSolveMode::Direct,
            cycle: None,
            nu1: None,
            nu2: None,
            krylov: KrylovConfig::default(),
            gs_target: 10.0,
            lambda_factor: 1.0,
            abc: AbcParams::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Multigrid settings with the method defaults and explicit overrides.
    pub fn hierarchy(&self, dim: usize) -> HierarchyConfig {
        let mut h = match self.preconditioner {
            PrecChoice::Monolithic => HierarchyConfig::monolithic_default(self.levels, self.alpha),
            _ if dim == 3 => HierarchyConfig::block_default_3d(self.levels, self.alpha),
            _ => HierarchyConfig::block_default(self.levels, self.alpha),
        };
        if let Some(c) = self.cycle {
            h.cycle = c;
        }
        if let Some(v) = self.nu1 {
            h.nu1 = v;
        }
        if let Some(v) = self.nu2 {
            h.nu2 = v;
        }
        h
    }

    pub fn setup(&self, dim: usize) -> SolveSetup {
        let hierarchy = self.hierarchy(dim);
        let block_solve = if self.preconditioner == PrecChoice::Monolithic { BlockSolveMode::Multigrid } else { self.block_solve };
        let mut krylov = self.krylov.clone();
        krylov.seed = self.seed;
        SolveSetup { preconditioner: self.preconditioner, block_solve, hierarchy, krylov }
    }

    /// The configuration with every default made explicit.
    pub fn effective(&self, dim: usize, cells: &[usize]) -> Self {
        let h = self.hierarchy(dim);
        let mut e = self.clone();
        e.grid = cells.to_vec();
        e.cycle = Some(h.cycle);
        e.nu1 = Some(h.nu1);
        e.nu2 = Some(h.nu2);
        e.krylov.seed = self.seed;
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_are_exact() {
        let v = serde_json::to_value(RunConfig::default()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "abc", "alpha", "block_solve", "cycle", "grid", "gs_target", "krylov", "lambda_factor", "levels", "media",
                "nu1", "nu2", "output_dir", "preconditioner", "seed"
            ]
        );
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn method_defaults_and_overrides() {
        let mut c = RunConfig { preconditioner: PrecChoice::Monolithic, ..Default::default() };
        assert_eq!(c.hierarchy(2).nu2, 1);
        c.nu2 = Some(3);
        assert_eq!(c.hierarchy(2).nu2, 3);
        let e = c.effective(2, &[8, 8]);
        assert_eq!(e.nu1, Some(1));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }
}
