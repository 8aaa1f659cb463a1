//! Sequential against parallel timings for the hot kernels. The parallel
//! variant runs on the global rayon pool, the sequential one inside a
//! single-thread pool so the same code paths are measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use helmstack::discretize::ApVariant;
use helmstack::experiments::{build_preconditioner, PrecChoice, Problem, SolveSetup};
use helmstack::krylov::KrylovConfig;
use helmstack::media::BuiltinMedia;
use helmstack::multigrid::{inverse_diagonal, jacobi_sweep};
use helmstack::precond::ZOperator;
use helmstack::sparse::FlopLedger;
use helmstack::C64;

fn single_thread() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()
}

fn problem(cells: &[usize]) -> Problem {
    Problem::builtin(BuiltinMedia::Linear, cells, 1.0, 10.0).unwrap()
}

fn rhs(n: usize) -> Vec<C64> {
    (0..n).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect()
}

fn spmv(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    for n in [128, 512] {
        let p = problem(&[n, n / 2]);
        let k = p.sys.matrix();
        let x = rhs(k.ncols());
        let mut y = vec![C64::new(0.0, 0.0); k.nrows()];
        g.bench_with_input(BenchmarkId::new("seq", n), &n, |b, _| b.iter(|| k.spmv_seq(&x, &mut y)));
        g.bench_with_input(BenchmarkId::new("par", n), &n, |b, _| b.iter(|| k.spmv_par(&x, &mut y)));
    }
    g.finish();
}

fn jacobi(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobi");
    let pool = single_thread();
    for n in [128, 512] {
        let p = problem(&[n, n / 2]);
        let h = &p.sys.blocks[0];
        let dinv = inverse_diagonal(h).unwrap();
        let b = rhs(h.nrows());
        let ledger = FlopLedger::new();
        let mut x = vec![C64::new(0.0, 0.0); h.nrows()];
        g.bench_with_input(BenchmarkId::new("seq", n), &n, |bch, _| {
            bch.iter(|| pool.install(|| jacobi_sweep(h, &dinv, &mut x, &b, 0.8, &ledger)))
        });
        g.bench_with_input(BenchmarkId::new("par", n), &n, |bch, _| {
            bch.iter(|| jacobi_sweep(h, &dinv, &mut x, &b, 0.8, &ledger))
        });
    }
    g.finish();
}

fn z_columns(c: &mut Criterion) {
    let mut g = c.benchmark_group("z_columns");
    g.sample_size(10);
    let pool = single_thread();
    let p = problem(&[32, 16]);
    let z = ZOperator::new(&p.sys, 0.1, ApVariant::RightWeighted).unwrap();
    g.bench_function("seq", |b| b.iter(|| pool.install(|| z.dense())));
    g.bench_function("par", |b| b.iter(|| z.dense()));
    g.finish();
}

fn block_solves(c: &mut Criterion) {
    let mut g = c.benchmark_group("block_solves");
    g.sample_size(20);
    let pool = single_thread();
    for (name, setup) in [
        ("direct", SolveSetup::direct(PrecChoice::BlockAcoustic, KrylovConfig::default())),
        ("multigrid", SolveSetup::block_multigrid(2, 2, 0.1, KrylovConfig::default())),
    ] {
        let p = problem(&[256, 128]);
        let prec = build_preconditioner(&p.sys, &setup).unwrap();
        let r = rhs(p.sys.size());
        let ledger = FlopLedger::new();
        g.bench_function(BenchmarkId::new("seq", name), |b| b.iter(|| pool.install(|| prec.op.apply(&r, &ledger))));
        g.bench_function(BenchmarkId::new("par", name), |b| b.iter(|| prec.op.apply(&r, &ledger)));
    }
    g.finish();
}

criterion_group!(benches, spmv, jacobi, z_columns, block_solves);
criterion_main!(benches);
