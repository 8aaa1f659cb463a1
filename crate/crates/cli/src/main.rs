mod config;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use helmstack::analysis::{flop_table, rho_z_sweep, slice_media, spectrum_of_z, write_sweep_csv};
use helmstack::experiments::{PrecChoice, Problem};
use helmstack::io::{EhGrid, BOTTOM_EXTENSION};
use helmstack::krylov::KrylovMethod;
use helmstack::media::{apply_abc, ElasticRules, MediaModel};
use helmstack::multigrid::CycleKind;
use helmstack::precond::BlockSolveMode;
use helmstack::suites::{run_suite, Suite};
use serde::Serialize;

use config::RunConfig;
use run::{cmd_solve, load_media, InputError};

#[derive(Parser)]
#[command(name = "helmstack", version, about = "Mixed elastic Helmholtz solver with block-acoustic preconditioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one point-source problem and write report, residuals and fields.
    Solve(SolveArgs),
    /// Run a desk-scale experiment suite and print its CSV table.
    Bench {
        /// table1, table3, flops, theorem, shiftsweep or compare-fp-bfbt
        suite: String,
        #[arg(long, default_value_t = 60_000)]
        max_cells: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert or extend an EHGRID (ρ, Vp, Vs) file and report derived λ, μ.
    Convert {
        input: PathBuf,
        output: PathBuf,
        /// Rebuild ρ and Vs from Vp with ρ = 0.25 Vp + 1.2 and Vs = 0.5 Vp.
        #[arg(long)]
        from_vp: bool,
        /// Append 16 copies of the deepest row.
        #[arg(long)]
        extend_bottom: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Spectra of Z, shift sweeps and cycle-cost tables.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
}

#[derive(Subcommand)]
enum Analysis {
    /// Eigenvalues of Z on a top-left slice, as `re,im` CSV.
    Spectrum {
        #[command(flatten)]
        media: MediaArgs,
        #[arg(long, num_args = 2.., default_values_t = [50, 50])]
        slice: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-method ρ(Z) for each shift, as `alpha,rho` CSV.
    Sweep {
        #[command(flatten)]
        media: MediaArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.01, 0.05, 0.1, 0.2, 0.5])]
        alphas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-cycle cost of block-acoustic and monolithic multigrid.
    Flops {
        #[command(flatten)]
        media: MediaArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [2])]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct MediaArgs {
    #[arg(long, default_value = "linear")]
    media: String,
    #[arg(long, num_args = 2..=3, default_values_t = [400, 128])]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    gs: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MediaArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            media: self.media.clone(),
            grid: self.grid.clone(),
            gs_target: self.gs,
            lambda_factor: self.lambda_factor,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// JSON configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    media: Option<String>,
    #[arg(long, num_args = 2..=3)]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// block-acoustic, monolithic, fp, bfbt or none
    #[arg(long)]
    preconditioner: Option<String>,
    /// direct or multigrid
    #[arg(long)]
    block_solve: Option<String>,
    /// V or W
    #[arg(long)]
    cycle: Option<String>,
    #[arg(long)]
    nu1: Option<usize>,
    #[arg(long)]
    nu2: Option<usize>,
    /// gmres or fgmres
    #[arg(long)]
    method: Option<String>,
    /// Restart length, 0 for none.
    #[arg(long)]
    restart: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    gs: Option<f64>,
    #[arg(long)]
    lambda_factor: Option<f64>,
    #[arg(long)]
    abc_width: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Log-scale the PPM heatmaps.
    #[arg(long)]
    log_scale: bool,
}

fn input<T>(r: Result<T, impl std::fmt::Display>) -> anyhow::Result<T> {
    r.map_err(|e| InputError(e.to_string()).into())
}

impl SolveArgs {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => input(RunConfig::load(p).with_context(|| format!("reading {}", p.display())).map_err(|e| format!("{e:#}")))?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.media {
            c.media = v.clone();
        }
        if let Some(v) = &self.grid {
            c.grid = v.clone();
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = &self.preconditioner {
            c.preconditioner = input(v.parse::<PrecChoice>())?;
        }
        if let Some(v) = &self.block_solve {
            c.block_solve = match v.as_str() {
                "direct" => BlockSolveMode::Direct,
                "multigrid" => BlockSolveMode::Multigrid,
                _ => return Err(InputError(format!("unknown block solve '{v}'")).into()),
            };
        }
        if let Some(v) = &self.cycle {
            c.cycle = Some(match v.as_str() {
                "V" | "v" => CycleKind::V,
                "W" | "w" => CycleKind::W,
                _ => return Err(InputError(format!("unknown cycle '{v}'")).into()),
            });
        }
        if self.nu1.is_some() {
            c.nu1 = self.nu1;
        }
        if self.nu2.is_some() {
            c.nu2 = self.nu2;
        }
        if let Some(v) = &self.method {
            c.krylov.method = match v.as_str() {
                "gmres" => KrylovMethod::Gmres,
                "fgmres" => KrylovMethod::Fgmres,
                _ => return Err(InputError(format!("unknown Krylov method '{v}'")).into()),
            };
        }
        if let Some(v) = self.restart {
            c.krylov.restart = v;
        }
        if let Some(v) = self.tol {
            c.krylov.tol = v;
        }
        if let Some(v) = self.max_iters {
            c.krylov.max_total_iters = v;
        }
        if let Some(v) = self.gs {
            c.gs_target = v;
        }
        if let Some(v) = self.lambda_factor {
            c.lambda_factor = v;
        }
        if let Some(v) = self.abc_width {
            c.abc.width = v;
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

fn emit(out: &Option<PathBuf>, bytes: Vec<u8>) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn sponge(media: &MediaModel, cfg: &RunConfig) -> anyhow::Result<MediaModel> {
    Ok(apply_abc(media, &cfg.abc.fitted(&media.grid))?)
}

#[derive(Serialize)]
struct ConvertReport {
    grid: Vec<usize>,
    spacing: Vec<f64>,
    vp_range: [f64; 2],
    vs_range: [f64; 2],
    rho_range: [f64; 2],
    lambda_range: [f64; 2],
    mu_range: [f64; 2],
    poisson_range: [f64; 2],
}

fn range(v: &[f64]) -> [f64; 2] {
    [v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)]
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.config()?;
            let report = cmd_solve(&cfg, args.log_scale)?;
            eprintln!(
                "{} after {} preconditioner applications, relative residual {:.3e}",
                if report.converged { "converged" } else { "not converged" },
                report.iterations,
                report.final_residual
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { suite, max_cells, out } => {
            let suite: Suite = input(suite.parse::<Suite>())?;
            let table = run_suite(suite, max_cells)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(&out, buf)?;
            let failed = table.failures();
            if failed > 0 {
                eprintln!("{failed} row(s) outside tolerance");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Convert { input: src, output, from_vp, extend_bottom, report } => {
            let mut g = input(EhGrid::read(&src).map_err(|e| format!("{}: {e}", src.display())))?;
            if from_vp {
                g = EhGrid::from_vp(g.grid, g.vp, ElasticRules::default())?;
            }
            if extend_bottom {
                g = g.extend_bottom(BOTTOM_EXTENSION)?;
            }
            let m = input(g.to_media())?;
            g.write(&output)?;
            let d = g.grid.dim;
            let r = ConvertReport {
                grid: g.grid.cells[..d].to_vec(),
                spacing: g.grid.spacing[..d].to_vec(),
                vp_range: range(&g.vp),
                vs_range: range(&g.vs),
                rho_range: range(&g.rho),
                lambda_range: range(&m.lambda),
                mu_range: range(&m.mu),
                poisson_range: range(&m.poisson_ratios()),
            };
            emit(&report, serde_json::to_string_pretty(&r)?.into_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { what } => {
            match what {
                Analysis::Spectrum { media, slice, alpha, out } => {
                    let cfg = media.config();
                    let full = load_media(&cfg)?;
                    // ω follows the full model so the slice sees the same frequency
                    let omega = helmstack::media::select_omega(&full, cfg.gs_target)?.omega;
                    let s = slice_media(&full, &slice, &cfg.abc)?;
                    let r = spectrum_of_z(&cfg.media, &s, omega, alpha)?;
                    let mut buf = Vec::new();
                    r.write_csv(&mut buf)?;
                    emit(&out, buf)?;
                    eprintln!("spectral radius {:.6}", r.spectral_radius());
                }
                Analysis::Sweep { media, alphas, out } => {
                    let cfg = media.config();
                    let m = sponge(&load_media(&cfg)?, &cfg)?;
                    let p = Problem::from_media(&m, cfg.gs_target, None)?;
                    let pts = rho_z_sweep(&p.sys, &alphas, 1e-6, 3000, cfg.seed)?;
                    let mut buf = Vec::new();
                    write_sweep_csv(&pts, &mut buf)?;
                    emit(&out, buf)?;
                }
                Analysis::Flops { media, levels, alpha, out } => {
                    let cfg = media.config();
                    let m = sponge(&load_media(&cfg)?, &cfg)?;
                    let p = Problem::from_media(&m, cfg.gs_target, None)?;
                    let t = flop_table(&p, &levels, alpha)?;
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf)?;
                    emit(&out, buf)?;
                    if let Some(r) = t.coarse_ratio() {
                        eprintln!("coarse nnz ratio monolithic/block-acoustic {r:.2}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HELMSTACK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InputError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
