//! Acceptance suite: ten criteria, one status line each. Run with
//! `cargo test --release --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use helmstack::discretize::{build_ap, build_commutator, build_hp, ApVariant, SaddleSystem};
use helmstack::experiments::{build_preconditioner, cycle_cost, solve, PrecChoice, Problem, SolveSetup};
use helmstack::grid::Grid;
use helmstack::krylov::{gmres_solve, KrylovConfig};
use helmstack::linop::{norm, LinearMap};
use helmstack::media::{BuiltinMedia, MediaModel};
use helmstack::multigrid::{Families, HierarchyConfig, MgHierarchy};
use helmstack::precond::{build_t_and_verify, dense_t, monolithic_preconditioner, BlockPrec, BlockPrecConfig, SchurKind};
use helmstack::sparse::{dense_eig, hausdorff, CsrMatrix, DenseLu, DenseMatrix, DirectSolver, FlopLedger};
use helmstack::suites::theorem_system;
use helmstack::analysis::rho_z_sweep;
use helmstack::media3d::solve_3d_default;
use helmstack::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let el = t.elapsed();
    let pass = o.pass && el <= budget;
    println!(
        "criterion {id:>2} [{}] {name}: {} ({:.1} s of {} s)",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        el.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn rvec(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn dense(m: &CsrMatrix) -> DenseMatrix {
    m.to_dense()
}

fn dense_inverse_times(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let lu = DenseLu::factor(a).expect("nonsingular");
    let cols: Vec<Vec<C64>> = (0..b.ncols()).map(|j| lu.solve(&(0..b.nrows()).map(|i| b[(i, j)]).collect::<Vec<_>>())).collect();
    DenseMatrix::from_columns(a.nrows(), &cols)
}

fn periodic_constant(cells: &[usize]) -> SaddleSystem {
    let h = vec![1.0 / cells[0] as f64; cells.len()];
    let g = Grid::new(cells, &h).unwrap().with_periodic(true);
    let n = g.n_cells();
    let m = MediaModel::new(g, vec![1.0; n], vec![16.0; n], vec![1.0; n], vec![0.01 * PI; n]).unwrap();
    SaddleSystem::assemble(&m, 2.0 * PI / (10.0 * h[0])).unwrap()
}

fn c1_exact_commutation() -> Outcome {
    let mut worst: f64 = 0.0;
    for cells in [vec![16, 16], vec![8, 8, 8]] {
        let s = periodic_constant(&cells);
        // oracle: dense GᵀA − A_p Gᵀ from the assembled pieces
        let gt = dense(&s.gt);
        let gta = gt.matmul(&dense(&s.a()));
        let xi = gta.sub(&dense(&build_ap(&s, ApVariant::RightWeighted)).matmul(&gt));
        let lib = build_commutator(&s, ApVariant::RightWeighted).xi;
        worst = worst.max(xi.frobenius_norm() / gta.frobenius_norm()).max(lib.frobenius_norm() / gta.frobenius_norm());
    }
    Outcome { pass: worst <= 1e-12, detail: format!("max ‖Ξ‖_F/‖GᵀA‖_F = {:.2e}", worst + 0.0) }
}

fn c2_theorem() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [8, 12] {
        let s = theorem_system(n).unwrap();
        let rep = build_t_and_verify(&s, ApVariant::RightWeighted, 7).unwrap();
        // independent dense Z = Ξ A⁻¹ G H_p⁻¹ and dense T = I − P⁻¹K
        let ap = build_ap(&s, ApVariant::RightWeighted);
        let hp = dense(&build_hp(&s, &ap));
        let xi = dense(&build_commutator(&s, ApVariant::RightWeighted).xi);
        let hinv = dense_inverse_times(&hp, &DenseMatrix::identity(s.m));
        let z = xi.matmul(&dense_inverse_times(&dense(&s.a()), &dense(&s.g).matmul(&hinv)));
        let mut ez = dense_eig(&z).unwrap();
        let rho = ez.iter().map(|v| v.norm()).fold(0.0, f64::max);
        ez.push(C64::new(0.0, 0.0));
        let prec = BlockPrec::new(&s, &BlockPrecConfig::direct(SchurKind::BlockAcoustic)).unwrap();
        let et = dense_eig(&dense_t(&s.matrix(), &prec)).unwrap();
        let h = hausdorff(&et, &ez);
        let unit = et.iter().filter(|v| v.norm() <= 1e-6).count();
        let ok_a = h <= 1e-6 * (1.0 + rho);
        let ok_b = unit >= s.n;
        let ok_c = (rep.rho_power - rho).abs() <= 1e-3 * rho;
        pass &= ok_a && ok_b && ok_c && rep.passed();
        parts.push(format!(
            "{n}x{n}: hausdorff {h:.1e}, unit eigenvalues {unit}/{} needed, ρ(Z) {rho:.5} vs power {:.5}",
            s.n, rep.rho_power
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c3_direct_counts() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for cells in [[200, 64], [400, 128]] {
        let mut counts = Vec::new();
        for f in [1.0, 10.0, 100.0, 1000.0] {
            let p = Problem::builtin(BuiltinMedia::Linear, &cells, f, 10.0).unwrap();
            let o = solve(&p, &SolveSetup::direct(PrecChoice::BlockAcoustic, KrylovConfig::default())).unwrap();
            pass &= o.report.converged && o.report.iterations <= 25;
            counts.push(o.report.iterations);
        }
        let spread = counts.iter().max().unwrap() - counts.iter().min().unwrap();
        pass &= spread <= 6;
        parts.push(format!("{}x{} counts {:?} spread {spread}", cells[0], cells[1], counts));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c4_multigrid_cost() -> Outcome {
    let p = Problem::builtin(BuiltinMedia::Linear, &[400, 128], 1.0, 10.0).unwrap();
    let b = solve(&p, &SolveSetup::block_multigrid(2, 2, 0.1, KrylovConfig::restarted(5))).unwrap();
    let m = solve(&p, &SolveSetup::monolithic(2, 0.1, KrylovConfig::restarted(5))).unwrap();
    let (fb, fm) = (b.total_flops(), m.total_flops());
    let its = b.report.iterations;
    let pass = b.report.converged && m.report.converged && (16..=47).contains(&its) && fb < fm;
    Outcome {
        pass,
        detail: format!(
            "block-acoustic {its} applications ({} Arnoldi steps), {:.0} per cell; monolithic {} applications, {:.0} per cell",
            b.report.arnoldi_steps,
            fb as f64 / b.n_cells as f64,
            m.report.iterations,
            fm as f64 / m.n_cells as f64
        ),
    }
}

fn c5_flops() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for cells in [[128, 64], [256, 64]] {
        let p = Problem::builtin(BuiltinMedia::Linear, &cells, 1.0, 10.0).unwrap();
        let b = cycle_cost(&p, &SolveSetup::block_multigrid(2, 2, 0.1, KrylovConfig::restarted(5))).unwrap();
        let m = cycle_cost(&p, &SolveSetup::monolithic(2, 0.1, KrylovConfig::restarted(5))).unwrap();
        pass &= (b.cycle_per_cell - 98.0).abs() <= 0.05 * 98.0 && (m.cycle_per_cell - 105.0).abs() <= 0.05 * 105.0;
        parts.push(format!("{}x{}: block {:.1}, monolithic {:.1}", cells[0], cells[1], b.cycle_per_cell, m.cycle_per_cell));
    }
    Outcome { pass, detail: parts.join("; ") }
}

/// Periodic forward difference from cells to faces along `axis`.
fn oracle_gradient(nx: usize, ny: usize, h: f64) -> DenseMatrix {
    let n = nx * ny;
    let mut g = DenseMatrix::zeros(2 * n, n);
    for j in 0..ny {
        for i in 0..nx {
            let c = i + nx * j;
            let (w, s) = ((i + nx - 1) % nx + nx * j, i + nx * ((j + ny - 1) % ny));
            g[(c, c)] += C64::new(1.0 / h, 0.0);
            g[(c, w)] -= C64::new(1.0 / h, 0.0);
            g[(n + c, c)] += C64::new(1.0 / h, 0.0);
            g[(n + c, s)] -= C64::new(1.0 / h, 0.0);
        }
    }
    g
}

fn c6_acoustic_reduction() -> Outcome {
    let (nx, ny, h) = (16, 12, 0.25);
    let g = Grid::new(&[nx, ny], &[h, h]).unwrap().with_periodic(true);
    let n = nx * ny;
    let (rho, lambda, gamma, omega) = (1.7, 3.0, 0.3, 2.5);
    let m = MediaModel::new(g, vec![rho; n], vec![lambda; n], vec![0.0; n], vec![gamma; n]).unwrap();
    let s = SaddleSystem::assemble(&m, omega).unwrap();
    let mut f = rvec(s.size(), 11);
    f[s.n..].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    let x = DirectSolver::new(&s.matrix(), None).unwrap().solve(&f);
    let gt_u = s.gt.mul_vec(&x[..s.n]);
    let p: Vec<C64> = gt_u.iter().map(|v| v * lambda).collect();
    // oracle acoustic system (GᵀG − ω² m/λ) p = Gᵀ f with m = ρ(1 − iγ/ω)
    let go = oracle_gradient(nx, ny, h);
    let gto = go.transpose();
    let mass = C64::new(rho, 0.0) * C64::new(1.0, -gamma / omega);
    let lhs = gto.matmul(&go).mul_vec(&p);
    let rhs = gto.mul_vec(&f[..s.n]);
    let r: Vec<C64> = (0..n).map(|i| lhs[i] - omega * omega * mass / lambda * p[i] - rhs[i]).collect();
    let rel = norm(&r) / norm(&rhs);
    Outcome { pass: rel <= 1e-10, detail: format!("relative acoustic residual {rel:.2e}") }
}

fn c7_shift_sweep() -> Outcome {
    let p = Problem::builtin(BuiltinMedia::Linear, &[400, 128], 1.0, 10.0).unwrap();
    let shifts = [0.0, 0.01, 0.05, 0.1, 0.2, 0.5];
    let pts = rho_z_sweep(&p.sys, &shifts, 1e-6, 3000, 1).unwrap();
    let monotone = pts.windows(2).all(|w| w[1].rho <= w[0].rho);
    let first_below = pts.iter().skip(1).find(|q| q.rho < 1.0).map(|q| q.alpha);
    let pass = monotone && pts.iter().all(|q| q.converged) && first_below.is_some_and(|a| a <= 0.05);
    let rhos: Vec<String> = pts.iter().map(|q| format!("{}:{:.4}", q.alpha, q.rho)).collect();
    Outcome { pass, detail: format!("ρ(Z) {} ; monotone {monotone}", rhos.join(" ")) }
}

fn c8_commutator_comparison() -> Outcome {
    let count = |factor: f64, gs: f64| -> Vec<Option<usize>> {
        let p = Problem::builtin(BuiltinMedia::Homogeneous, &[128, 64], factor, gs).unwrap();
        [PrecChoice::BlockAcoustic, PrecChoice::Fp, PrecChoice::Bfbt]
            .into_iter()
            .map(|c| {
                let k = KrylovConfig { max_total_iters: 1500, ..KrylovConfig::restarted(5) };
                let o = solve(&p, &SolveSetup::direct(c, k)).unwrap();
                o.report.converged.then_some(o.report.iterations)
            })
            .collect()
    };
    let within2 = |c: &[Option<usize>]| {
        let v: Vec<usize> = c.iter().flatten().cloned().collect();
        v.len() == 3 && 2 * v.iter().min().unwrap() >= *v.iter().max().unwrap()
    };
    let low = count(1.0, 100.0);
    let high = count(1.0, 11.0);
    let inc_low = count(1000.0, 100.0);
    let inc_high = count(1000.0, 11.0);
    let beats = high[0].is_some_and(|b| high[1..].iter().all(|c| c.is_none_or(|c| b <= c)));
    let pass = within2(&low) && beats && within2(&inc_low) && within2(&inc_high);
    Outcome {
        pass,
        detail: format!(
            "[block, F_p, BFBt] σ=0.47 G_s=100 {low:?}, G_s=11 {high:?}; σ=0.499 G_s=100 {inc_low:?}, G_s=11 {inc_high:?}"
        ),
    }
}

fn linearity_error(p: &dyn LinearMap, seed: u64) -> f64 {
    let l = FlopLedger::new();
    let (a, b) = (rvec(p.dim(), seed), rvec(p.dim(), seed + 1));
    let s = C64::new(-0.4, 2.1);
    let comb: Vec<C64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
    let (pa, pb, pc) = (p.apply(&a, &l), p.apply(&b, &l), p.apply(&comb, &l));
    let d: Vec<C64> = (0..pc.len()).map(|i| pc[i] - s * pa[i] - pb[i]).collect();
    norm(&d) / norm(&pc)
}

fn c9_invariants() -> Outcome {
    let p = Problem::builtin(BuiltinMedia::Linear, &[32, 32], 1.0, 10.0).unwrap();
    let s = &p.sys;
    let mut lin: f64 = 0.0;
    for setup in [
        SolveSetup::direct(PrecChoice::BlockAcoustic, KrylovConfig::default()),
        SolveSetup::direct(PrecChoice::Fp, KrylovConfig::default()),
        SolveSetup::direct(PrecChoice::Bfbt, KrylovConfig::default()),
        SolveSetup::block_multigrid(2, 3, 0.1, KrylovConfig::default()),
        SolveSetup::monolithic(3, 0.1, KrylovConfig::default()),
    ] {
        lin = lin.max(linearity_error(build_preconditioner(s, &setup).unwrap().op.as_ref(), 5));
    }
    let prec = build_preconditioner(s, &SolveSetup::block_multigrid(2, 2, 0.1, KrylovConfig::default())).unwrap();
    let cfg = KrylovConfig { restart: 5, check_orthogonality: true, ..Default::default() };
    let (_, rep) = gmres_solve(&s.matrix(), prec.op.as_ref(), &p.rhs, &cfg, &FlopLedger::new()).unwrap();
    let orth = rep.orthogonality_loss.unwrap();

    // Galerkin identity against dense R H P on the monolithic and a block hierarchy
    let mono = monolithic_preconditioner(s, &HierarchyConfig::monolithic_default(2, 0.1)).unwrap();
    let blk = MgHierarchy::build(&s.blocks[0], s.block_shift_mass(0), s.omega, &Families::single(s.grid.face_layout(0)), &HierarchyConfig::block_default(3, 0.1)).unwrap();
    let mut gal: f64 = 0.0;
    for h in [&mono, &blk] {
        for (i, lvl) in h.levels.iter().enumerate() {
            let next = if i + 1 < h.levels.len() { &h.levels[i + 1].op } else { &h.coarse_op };
            let oracle = dense(&lvl.r).matmul(&dense(&lvl.op)).matmul(&dense(&lvl.p));
            gal = gal.max(oracle.sub(&dense(next)).max_abs() / oracle.max_abs());
        }
    }

    // spmv against a dense product written out here
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (r, c) = (40, 33);
    let mut trips = Vec::new();
    for _ in 0..300 {
        trips.push((rng.gen_range(0..r), rng.gen_range(0..c), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
    }
    let a = CsrMatrix::from_triplets(r, c, trips.clone());
    let x = rvec(c, 3);
    let mut y = vec![C64::new(0.0, 0.0); r];
    for &(i, j, v) in &trips {
        y[i] += v * x[j];
    }
    let z = a.mul_vec(&x);
    let sp = (0..r).map(|i| (z[i] - y[i]).norm()).fold(0.0, f64::max) / y.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let pass = lin <= 1e-12 && orth <= 1e-10 && gal <= 1e-12 && sp <= 1e-13;
    Outcome {
        pass,
        detail: format!("linearity {lin:.1e}, orthogonality {orth:.1e}, Galerkin {gal:.1e}, spmv {sp:.1e}"),
    }
}

/// Count from the first verified run of this configuration.
const BASELINE_3D: usize = 20;

fn c10_three_d() -> Outcome {
    let p = Problem::builtin(BuiltinMedia::Homogeneous, &[32, 32, 16], 1.0, 10.0).unwrap();
    let r = solve_3d_default(&p, 2, 0.1).unwrap();
    let pass = r.converged && r.final_residual <= 1e-6 && r.iterations <= 60;
    Outcome {
        pass,
        detail: format!("{} applications (baseline {BASELINE_3D}), relative residual {:.1e}", r.iterations, r.final_residual),
    }
}

#[test]
fn acceptance_criteria() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let results = [
        run(1, "exact commutation on periodic constant media", Duration::from_secs(1), c1_exact_commutation),
        run(2, "spectrum of T against Z", min(2), c2_theorem),
        run(3, "direct-solve scalability on linear media", min(10), c3_direct_counts),
        run(4, "block-acoustic multigrid against monolithic", min(10), c4_multigrid_cost),
        run(5, "per-cycle FLOP count", min(1), c5_flops),
        run(6, "acoustic reduction at zero shear", Duration::from_secs(30), c6_acoustic_reduction),
        run(7, "shift sweep of ρ(Z)", min(20), c7_shift_sweep),
        run(8, "comparison with F_p and BFBt", min(15), c8_commutator_comparison),
        run(9, "linearity, orthogonality, Galerkin, spmv", min(1), c9_invariants),
        run(10, "3D multigrid smoke run", min(15), c10_three_d),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len());
}
