//! Right-preconditioned restarted GMRES and flexible GMRES.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{axpy, dot, norm, LinearMap};
use crate::sparse::{FlopLedger, FlopSnapshot};

type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KrylovMethod {
    #[default]
    Gmres,
    Fgmres,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub method: KrylovMethod,
    /// Restart length; 0 means no restart.
    pub restart: usize,
    pub tol: f64,
    pub max_total_iters: usize,
    pub seed: u64,
    /// Measure `max |VᴴV - I|` at the end of every cycle.
    #[serde(default)]
    pub check_orthogonality: bool,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { method: KrylovMethod::Gmres, restart: 0, tol: 1e-6, max_total_iters: 2000, seed: 0, check_orthogonality: false }
    }
}

impl KrylovConfig {
    pub fn restarted(m: usize) -> Self {
        Self { restart: m, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tol)));
        }
        if self.max_total_iters == 0 {
            return Err(Error::Config("max_total_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub converged: bool,
    /// Preconditioner applications, including the one that maps the
    /// Krylov correction back at the end of each plain GMRES cycle.
    pub iterations: usize,
    /// Arnoldi steps summed over restarts.
    pub arnoldi_steps: usize,
    /// Relative residual after each iteration; entry 0 is the start.
    pub residual_history: Vec<f64>,
    /// Independently recomputed `‖b - Ax‖/‖b‖`.
    pub final_residual: f64,
    pub flops: FlopSnapshot,
    pub wall_time: f64,
    pub restarts: usize,
    /// Largest `|VᴴV - I|` entry seen, when requested.
    pub orthogonality_loss: Option<f64>,
}

impl SolverReport {
    /// Writes the history as `iter,relres` lines with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,relres")?;
        for (i, r) in self.residual_history.iter().enumerate() {
            writeln!(w, "{i},{r:e}")?;
        }
        Ok(())
    }
}

fn true_residual(op: &dyn LinearMap, b: &[C64], x: &[C64], ledger: &FlopLedger) -> Vec<C64> {
    let ax = op.apply(x, ledger);
    b.iter().zip(&ax).map(|(p, q)| p - q).collect()
}

/// GMRES with right preconditioning. See [`KrylovConfig`].
pub fn gmres_solve(
    op: &dyn LinearMap,
    prec: &dyn LinearMap,
    b: &[C64],
    cfg: &KrylovConfig,
    ledger: &FlopLedger,
) -> Result<(Vec<C64>, SolverReport)> {
    solve(op, prec, b, cfg, false, ledger)
}

/// Flexible GMRES: stores the preconditioned basis, so the preconditioner
/// may vary between iterations.
pub fn fgmres_solve(
    op: &dyn LinearMap,
    prec: &dyn LinearMap,
    b: &[C64],
    cfg: &KrylovConfig,
    ledger: &FlopLedger,
) -> Result<(Vec<C64>, SolverReport)> {
    solve(op, prec, b, cfg, true, ledger)
}

/// Dispatches on `cfg.method`.
pub fn krylov_solve(
    op: &dyn LinearMap,
    prec: &dyn LinearMap,
    b: &[C64],
    cfg: &KrylovConfig,
    ledger: &FlopLedger,
) -> Result<(Vec<C64>, SolverReport)> {
    solve(op, prec, b, cfg, cfg.method == KrylovMethod::Fgmres, ledger)
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn solve(
    op: &dyn LinearMap,
    prec: &dyn LinearMap,
    b: &[C64],
    cfg: &KrylovConfig,
    flexible: bool,
    ledger: &FlopLedger,
) -> Result<(Vec<C64>, SolverReport)> {
    cfg.validate()?;
    let n = op.dim();
    if b.len() != n || prec.dim() != n {
        return Err(Error::Dimension(format!("operator {n}, preconditioner {}, rhs {}", prec.dim(), b.len())));
    }
    let start = Instant::now();
    let before = ledger.snapshot();
    let bnorm = norm(b);
    let mut x = vec![ZERO; n];
    let mut history = vec![1.0];
    let mut report = SolverReport {
        converged: false,
        iterations: 0,
        arnoldi_steps: 0,
        residual_history: Vec::new(),
        final_residual: 0.0,
        flops: FlopSnapshot::default(),
        wall_time: 0.0,
        restarts: 0,
        orthogonality_loss: cfg.check_orthogonality.then_some(0.0),
    };
    if bnorm == 0.0 {
        report.converged = true;
        report.residual_history = vec![0.0];
        return Ok((x, report));
    }
    let m = if cfg.restart == 0 { cfg.max_total_iters } else { cfg.restart };
    let target = cfg.tol * bnorm;
    let mut r = b.to_vec();
    let mut rnorm = bnorm;
    loop {
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        let mut z: Vec<Vec<C64>> = Vec::new();
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, C64)> = Vec::with_capacity(m);
        let mut g = vec![C64::new(rnorm, 0.0)];
        v.push(r.iter().map(|x| x / rnorm).collect());
        let mut k = 0;
        while k < m && report.arnoldi_steps < cfg.max_total_iters {
            let zk = prec.apply(&v[k], ledger);
            let mut w = op.apply(&zk, ledger);
            if flexible {
                z.push(zk);
            }
            report.iterations += 1;
            report.arnoldi_steps += 1;
            let mut col = vec![ZERO; k + 2];
            let before_norm = norm(&w);
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(vi, &w);
                axpy(-hij, vi, &mut w);
                col[i] += hij;
            }
            if norm(&w) < 0.7 * before_norm {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(vi, &w);
                    axpy(-hij, vi, &mut w);
                    col[i] += hij;
                }
            }
            let wn = norm(&w);
            col[k + 1] = C64::new(wn, 0.0);
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = a * c + s * bb;
                col[i + 1] = -s.conj() * a + bb * c;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            col[k] = col[k] * c + s * col[k + 1];
            col[k + 1] = ZERO;
            cs.push((c, s));
            let gk = g[k];
            g[k] = gk * c;
            g.push(-s.conj() * gk);
            h.push(col);
            let estimate = g[k + 1].norm();
            history.push(estimate / bnorm);
            k += 1;
            let breakdown = wn <= 1e-14 * before_norm.max(f64::MIN_POSITIVE);
            if !breakdown {
                v.push(w.iter().map(|x| x / wn).collect());
            }
            if estimate <= target || breakdown {
                break;
            }
        }
        if let Some(loss) = report.orthogonality_loss.as_mut() {
            for i in 0..v.len() {
                for j in 0..=i {
                    let d = dot(&v[i], &v[j]) - if i == j { C64::new(1.0, 0.0) } else { ZERO };
                    *loss = loss.max(d.norm());
                }
            }
        }
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        if flexible {
            for (j, yj) in y.iter().enumerate() {
                axpy(*yj, &z[j], &mut x);
            }
        } else if k > 0 {
            let mut vy = vec![ZERO; n];
            for (j, yj) in y.iter().enumerate() {
                axpy(*yj, &v[j], &mut vy);
            }
            let dx = prec.apply(&vy, ledger);
            report.iterations += 1;
            axpy(C64::new(1.0, 0.0), &dx, &mut x);
        }
        r = true_residual(op, b, &x, ledger);
        rnorm = norm(&r);
        if let Some(last) = history.last_mut() {
            *last = rnorm / bnorm;
        }
        if rnorm <= target {
            report.converged = true;
            break;
        }
        if report.arnoldi_steps >= cfg.max_total_iters || rnorm == 0.0 || k == 0 {
            break;
        }
        report.restarts += 1;
    }
    report.final_residual = rnorm / bnorm;
    report.residual_history = history;
    let after = ledger.snapshot();
    report.flops = FlopSnapshot { ops: after.ops - before.ops, coarse: after.coarse - before.coarse };
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::Identity;
    use crate::sparse::CsrMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn identity_converges_in_one() {
        let a = CsrMatrix::identity(6);
        let b: Vec<C64> = (0..6).map(|i| c(i as f64 + 1.0)).collect();
        let (x, rep) = gmres_solve(&a, &Identity(6), &b, &KrylovConfig::default(), &FlopLedger::new()).unwrap();
        assert!(rep.converged && rep.arnoldi_steps == 1 && rep.iterations == 2);
        assert!(x.iter().zip(&b).all(|(p, q)| (p - q).norm() < 1e-14));
    }

    #[test]
    fn diagonal_in_at_most_n() {
        let d: Vec<C64> = (1..=10).map(|i| c(i as f64)).collect();
        let a = CsrMatrix::from_diag(&d);
        let b = vec![c(1.0); 10];
        let cfg = KrylovConfig { tol: 1e-12, ..Default::default() };
        let (_, rep) = gmres_solve(&a, &Identity(10), &b, &cfg, &FlopLedger::new()).unwrap();
        assert!(rep.converged && rep.arnoldi_steps <= 10 && rep.final_residual < 1e-12);
    }

    #[test]
    fn zero_rhs() {
        let a = CsrMatrix::identity(3);
        let (x, rep) = fgmres_solve(&a, &Identity(3), &[ZERO; 3], &KrylovConfig::restarted(5), &FlopLedger::new()).unwrap();
        assert!(rep.converged && rep.iterations == 0 && x.iter().all(|v| *v == ZERO));
    }

    fn random_system(n: usize) -> (CsrMatrix, Vec<C64>, CsrMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(4.0 + rng.gen::<f64>(), 0.5)));
            if i > 0 {
                t.push((i, i - 1, c(-1.0)));
                t.push((i - 1, i, c(-1.0)));
            }
            if i >= 7 {
                t.push((i, i - 7, C64::new(0.0, rng.gen_range(-0.5..0.5))));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let dinv: Vec<C64> = a.diagonal().iter().map(|d| C64::new(1.0, 0.0) / d).collect();
        let b: Vec<C64> = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
        (a, b, CsrMatrix::from_diag(&dinv))
    }

    #[test]
    fn flexible_matches_standard_for_fixed_preconditioner() {
        let (a, b, m) = random_system(60);
        let cfg = KrylovConfig { restart: 5, tol: 1e-10, check_orthogonality: true, ..Default::default() };
        let (x1, r1) = gmres_solve(&a, &m, &b, &cfg, &FlopLedger::new()).unwrap();
        let (x2, r2) = fgmres_solve(&a, &m, &b, &cfg, &FlopLedger::new()).unwrap();
        assert_eq!(r1.arnoldi_steps, r2.arnoldi_steps);
        assert_eq!(r2.iterations, r2.arnoldi_steps);
        assert_eq!(r1.iterations, r1.arnoldi_steps + r1.restarts + 1);
        assert!(x1.iter().zip(&x2).all(|(p, q)| (p - q).norm() < 1e-10));
        assert!(r1.orthogonality_loss.unwrap() < 1e-10);
        let res = true_residual(&a, &b, &x1, &FlopLedger::new());
        assert!((norm(&res) / norm(&b) - r1.final_residual).abs() < 1e-12);
        assert_eq!(r1.residual_history.len(), r1.arnoldi_steps + 1);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let (a, b, _) = random_system(60);
        let cfg = KrylovConfig { restart: 2, tol: 1e-14, max_total_iters: 3, ..Default::default() };
        let (_, rep) = gmres_solve(&a, &Identity(60), &b, &cfg, &FlopLedger::new()).unwrap();
        assert!(!rep.converged && rep.arnoldi_steps == 3);
    }

    #[test]
    fn csv_history() {
        let a = CsrMatrix::identity(2);
        let (_, rep) = gmres_solve(&a, &Identity(2), &[c(1.0), c(2.0)], &KrylovConfig::default(), &FlopLedger::new()).unwrap();
        let mut out = Vec::new();
        rep.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("iter,relres\n0,1e0\n1,"));
    }
}
