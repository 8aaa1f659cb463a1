use std::fs;
use std::path::Path;

use anyhow::Context;
use helmstack::experiments::{solve, Problem};
use helmstack::io::{complex_to_bytes, ppm_bytes, write_bytes, EhGrid};
use helmstack::krylov::SolverReport;
use helmstack::media::{builtin_media, BuiltinMedia, MediaModel};
use serde::Serialize;

use crate::config::RunConfig;

/// Input problems map to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn load_media(cfg: &RunConfig) -> anyhow::Result<MediaModel> {
    let mut media = match cfg.media.parse::<BuiltinMedia>() {
        Ok(name) => builtin_media(name, &cfg.grid, cfg.lambda_factor).map_err(|e| InputError(e.to_string()))?,
        Err(_) => {
            let path = Path::new(&cfg.media);
            let grid = EhGrid::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            let mut m = grid.to_media().map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            if cfg.lambda_factor != 1.0 {
                m.lambda.iter_mut().for_each(|l| *l *= cfg.lambda_factor);
                m.validate().map_err(|e| InputError(e.to_string()))?;
            }
            m
        }
    };
    media.gamma.iter_mut().for_each(|g| *g = 0.0);
    Ok(media)
}

#[derive(Serialize)]
struct RunReport<'a> {
    #[serde(flatten)]
    report: &'a SolverReport,
    omega: f64,
    omega_from_vp: bool,
    grid: Vec<usize>,
    n_cells: usize,
    factor_nnz: usize,
}

/// Assembles, solves and writes every artifact into the output directory.
pub fn cmd_solve(cfg: &RunConfig, log_scale: bool) -> anyhow::Result<SolverReport> {
    let media = load_media(cfg)?;
    let dim = media.grid.dim;
    let cells = media.grid.cells[..dim].to_vec();
    let effective = cfg.effective(dim, &cells);
    let problem = Problem::from_media(&media, cfg.gs_target, Some(&cfg.abc))?;
    let out = solve(&problem, &cfg.setup(dim))?;

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let run = RunReport {
        report: &out.report,
        omega: problem.omega.omega,
        omega_from_vp: problem.omega.from_vp,
        grid: cells,
        n_cells: out.n_cells,
        factor_nnz: out.factor_nnz,
    };
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&run)?)?;
    fs::write(dir.join("config.echo.json"), serde_json::to_string_pretty(&effective)?)?;
    let mut csv = Vec::new();
    out.report.write_csv(&mut csv)?;
    fs::write(dir.join("residuals.csv"), csv)?;

    let sys = &problem.sys;
    for k in 0..dim {
        let part = &out.x[sys.component_range(k)];
        write_bytes(&dir.join(format!("u{}.bin", k + 1)), &complex_to_bytes(part))?;
        write_bytes(&dir.join(format!("|u{}|.ppm", k + 1)), &ppm_bytes(&sys.grid.face_layout(k), part, log_scale))?;
    }
    let p = &out.x[sys.n..];
    write_bytes(&dir.join("p.bin"), &complex_to_bytes(p))?;
    write_bytes(&dir.join("|p|.ppm"), &ppm_bytes(&sys.grid.cell_layout(), p, log_scale))?;
    Ok(out.report)
}
