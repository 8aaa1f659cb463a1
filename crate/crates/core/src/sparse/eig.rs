use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

type C64 = Complex64;

/// Default size cap for the dense eigensolver.
pub const EIG_CAP: usize = 4000;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// All eigenvalues of a square complex matrix, unordered.
///
/// Householder reduction to upper Hessenberg form followed by single-shift
/// complex QR with Wilkinson shifts and exceptional shifts on stagnation.
pub fn dense_eig(a: &DenseMatrix) -> Result<Vec<C64>> {
    dense_eig_capped(a, EIG_CAP)
}

pub fn dense_eig_capped(a: &DenseMatrix, cap: usize) -> Result<Vec<C64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("eigenvalues of {}x{} matrix", n, a.ncols())));
    }
    if n > cap {
        return Err(Error::Capacity(format!("dense eigensolver cap is {cap}, matrix has size {n}")));
    }
    let mut h = a.clone();
    hessenberg_in_place(&mut h);
    hessenberg_qr(&mut h)
}

/// Reduces `h` to upper Hessenberg form by unitary similarity.
pub fn hessenberg_in_place(h: &mut DenseMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let x0 = h[(k + 1, k)];
        let tail: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let xnorm = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        // v = x + e^{i arg x0} |x| e1, P = I - 2 v vᴴ / (vᴴ v)
        v[0] = x0 + phase * xnorm;
        for i in 1..m {
            v[i] = h[(k + 1 + i, k)];
        }
        let vnorm2: f64 = v[..m].iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm2;
        for j in k..n {
            let s: C64 = (0..m).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            let s = s * beta;
            for i in 0..m {
                h[(k + 1 + i, j)] -= v[i] * s;
            }
        }
        for i in 0..n {
            let row = h.row_mut(i);
            let s: C64 = (0..m).map(|t| row[k + 1 + t] * v[t]).sum();
            let s = s * beta;
            for t in 0..m {
                row[k + 1 + t] -= s * v[t].conj();
            }
        }
        h[(k + 1, k)] = -phase * xnorm;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let m = (a + d) * 0.5;
    let disc = (((a - d) * 0.5) * ((a - d) * 0.5) + b * c).sqrt();
    (m + disc, m - disc)
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Eigenvalues of an upper Hessenberg matrix; `h` is overwritten.
fn hessenberg_qr(h: &mut DenseMatrix) -> Result<Vec<C64>> {
    let n = h.nrows();
    let mut eigs = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eigs);
    }
    let hnorm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let max_sweeps = 50 * n.max(1);
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n as isize - 1;
    let mut rot: Vec<(f64, C64)> = Vec::with_capacity(n);
    while hi >= 0 {
        let hiu = hi as usize;
        let mut l = hiu;
        while l > 0 {
            let scale = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let scale = if scale == 0.0 { hnorm } else { scale };
            if h[(l, l - 1)].norm() <= eps * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hiu {
            eigs.push(h[(hiu, hiu)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if l + 1 == hiu {
            let (e1, e2) = eig2(h[(l, l)], h[(l, l + 1)], h[(hiu, l)], h[(hiu, hiu)]);
            eigs.push(e1);
            eigs.push(e2);
            hi -= 2;
            since_deflation = 0;
            continue;
        }
        sweeps += 1;
        since_deflation += 1;
        if sweeps > max_sweeps {
            let found = eigs.len();
            return Err(Error::NoConvergence { iterations: sweeps, found, n });
        }
        let d = h[(hiu, hiu)];
        let shift = if since_deflation % 11 == 10 {
            d + C64::new(0.75 * h[(hiu, hiu - 1)].norm(), 0.0)
        } else {
            let (e1, e2) = eig2(h[(hiu - 1, hiu - 1)], h[(hiu - 1, hiu)], h[(hiu, hiu - 1)], d);
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        for k in l..=hiu {
            h[(k, k)] -= shift;
        }
        rot.clear();
        for k in l..hiu {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..=hiu {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hiu) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hiu {
            h[(k, k)] += shift;
        }
    }
    Ok(eigs)
}

/// Outcome of [`power_method`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimates the spectral radius of a linear map from repeated application
/// to a seeded random start vector. Stops when successive estimates differ
/// by less than `tol` relative, or after `max_iter` applications.
pub fn power_method<F>(op: F, n: usize, tol: f64, max_iter: usize, seed: u64) -> PowerEstimate
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    normalize(&mut v);
    let mut prev = f64::NAN;
    for it in 1..=max_iter {
        let mut w = op(&v);
        let est = normalize(&mut w);
        if est == 0.0 {
            return PowerEstimate { rho: 0.0, iterations: it, converged: true };
        }
        if prev.is_finite() && (est - prev).abs() < tol * est {
            return PowerEstimate { rho: est, iterations: it, converged: true };
        }
        prev = est;
        v = w;
    }
    PowerEstimate { rho: prev, iterations: max_iter, converged: false }
}

fn normalize(v: &mut [C64]) -> f64 {
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|z| *z /= nrm);
    }
    nrm
}

/// Symmetric Hausdorff distance between two finite point sets in ℂ.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one_side = |p: &[C64], q: &[C64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    one_side(a, b).max(one_side(b, a))
}
