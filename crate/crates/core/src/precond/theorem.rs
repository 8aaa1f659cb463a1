use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BlockPrec, BlockPrecConfig, SchurKind};
use crate::discretize::{apply_shift, build_ap, build_commutator, build_hp, ApVariant, SaddleSystem};
use crate::error::Result;
use crate::linop::LinearMap;
use crate::multigrid::Families;
use crate::sparse::{dense_eig, hausdorff, power_method, CsrMatrix, DenseMatrix, DirectSolver, FlopLedger, PowerEstimate};

type C64 = Complex64;

/// `Z = Ξ A⁻¹ G H_p⁻¹` with exact (optionally α-shifted) block solves and
/// the unshifted commutator.
#[derive(Debug, Clone)]
pub struct ZOperator {
    xi: CsrMatrix,
    g: CsrMatrix,
    a_solvers: Vec<DirectSolver>,
    hp: DirectSolver,
    offsets: Vec<usize>,
}

impl ZOperator {
    pub fn new(sys: &SaddleSystem, alpha: f64, variant: ApVariant) -> Result<Self> {
        let grid = &sys.grid;
        let mut a_solvers = Vec::with_capacity(grid.dim);
        for k in 0..grid.dim {
            let shifted = apply_shift(&sys.blocks[k], sys.block_shift_mass(k), alpha, sys.omega)?;
            let ord = Families::single(grid.face_layout(k)).band_ordering();
            a_solvers.push(DirectSolver::new(&shifted, Some(&ord))?);
        }
        let ap = build_ap(sys, variant);
        let hp = apply_shift(&build_hp(sys, &ap), &sys.hp_shift_mass(), alpha, sys.omega)?;
        let hp = DirectSolver::new(&hp, Some(&Families::single(grid.cell_layout()).band_ordering()))?;
        Ok(Self { xi: build_commutator(sys, variant).xi, g: sys.g.clone(), a_solvers, hp, offsets: sys.face_offsets.clone() })
    }

    pub fn m(&self) -> usize {
        self.xi.nrows()
    }

    /// `Z v`.
    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let w = self.g.mul_vec(&self.hp.solve(v));
        let mut u = Vec::with_capacity(w.len());
        for (k, s) in self.a_solvers.iter().enumerate() {
            u.extend(s.solve(&w[self.offsets[k]..self.offsets[k + 1]]));
        }
        self.xi.mul_vec(&u)
    }

    /// Column `j` of `Z`.
    pub fn column(&self, j: usize) -> Vec<C64> {
        let mut e = vec![C64::new(0.0, 0.0); self.m()];
        e[j] = C64::new(1.0, 0.0);
        self.apply_vec(&e)
    }

    /// Dense `Z`, columns formed in parallel when enabled.
    pub fn dense(&self) -> DenseMatrix {
        let m = self.m();
        #[cfg(feature = "parallel")]
        let cols: Vec<Vec<C64>> = (0..m).into_par_iter().map(|j| self.column(j)).collect();
        #[cfg(not(feature = "parallel"))]
        let cols: Vec<Vec<C64>> = (0..m).map(|j| self.column(j)).collect();
        DenseMatrix::from_columns(m, &cols)
    }

    pub fn spectral_radius(&self, tol: f64, max_iter: usize, seed: u64) -> PowerEstimate {
        power_method(|v| self.apply_vec(v), self.m(), tol, max_iter, seed)
    }
}

impl LinearMap for ZOperator {
    fn dim(&self) -> usize {
        self.m()
    }

    fn apply(&self, x: &[C64], ledger: &FlopLedger) -> Vec<C64> {
        ledger.charge(self.xi.nnz() + self.g.nnz());
        self.apply_vec(x)
    }
}

/// Dense error-propagation matrix `T = I - M⁻¹K` of the stationary
/// iteration, one column per unknown.
pub fn dense_t(k: &CsrMatrix, prec: &dyn LinearMap) -> DenseMatrix {
    let n = k.nrows();
    let ledger = FlopLedger::new();
    let col = |j: usize| {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(1.0, 0.0);
        let mut c = prec.apply(&k.mul_vec(&e), &ledger);
        c.iter_mut().for_each(|v| *v = -*v);
        c[j] += 1.0;
        c
    };
    #[cfg(feature = "parallel")]
    let cols: Vec<Vec<C64>> = (0..n).into_par_iter().map(col).collect();
    #[cfg(not(feature = "parallel"))]
    let cols: Vec<Vec<C64>> = (0..n).map(col).collect();
    DenseMatrix::from_columns(n, &cols)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub n: usize,
    pub m: usize,
    pub rho_z: f64,
    pub rho_t: f64,
    pub rho_power: f64,
    pub power_iterations: usize,
    /// Hausdorff distance between `spec(T)` and `spec(Z) ∪ {0}`.
    pub hausdorff: f64,
    pub hausdorff_tol: f64,
    /// Eigenvalues of `P⁻¹K` within `1e-6` of one.
    pub unit_eigenvalues: usize,
    pub spectrum_ok: bool,
    pub multiplicity_ok: bool,
    pub power_ok: bool,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.spectrum_ok && self.multiplicity_ok && self.power_ok
    }
}

/// Forms `T` and `Z` densely for the unshifted block-acoustic
/// preconditioner with exact solves and checks the spectral relations.
pub fn build_t_and_verify(sys: &SaddleSystem, variant: ApVariant, seed: u64) -> Result<TheoremReport> {
    let mut cfg = BlockPrecConfig::direct(SchurKind::BlockAcoustic);
    cfg.ap_variant = variant;
    let prec = BlockPrec::new(sys, &cfg)?;
    let t = dense_t(&sys.matrix(), &prec);
    let z = ZOperator::new(sys, 0.0, variant)?;
    let eig_t = dense_eig(&t)?;
    let mut eig_z = dense_eig(&z.dense())?;
    let rho_z = eig_z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let rho_t = eig_t.iter().map(|v| v.norm()).fold(0.0, f64::max);
    eig_z.push(C64::new(0.0, 0.0));
    let h = hausdorff(&eig_t, &eig_z);
    let tol = 1e-6 * (1.0 + rho_z);
    let unit = eig_t.iter().filter(|v| v.norm() <= 1e-6).count();
    let pm = z.spectral_radius(1e-9, 5000, seed);
    Ok(TheoremReport {
        n: sys.n,
        m: sys.m,
        rho_z,
        rho_t,
        rho_power: pm.rho,
        power_iterations: pm.iterations,
        hausdorff: h,
        hausdorff_tol: tol,
        unit_eigenvalues: unit,
        spectrum_ok: h <= tol,
        multiplicity_ok: unit >= sys.n,
        power_ok: (pm.rho - rho_z).abs() <= 1e-3 * rho_z.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::media::{apply_abc, AbcParams, MediaModel};

    fn abc_system(n: usize) -> SaddleSystem {
        let g = Grid::new(&[n, n], &[1.0 / n as f64; 2]).unwrap();
        let m = MediaModel::homogeneous(g, 1.0, 16.0, 1.0).unwrap();
        let m = apply_abc(&m, &AbcParams::default().fitted(&g)).unwrap();
        SaddleSystem::assemble(&m, 2.0 * std::f64::consts::PI / (10.0 / n as f64)).unwrap()
    }

    #[test]
    fn theorem_holds_on_small_grid() {
        let s = abc_system(8);
        let r = build_t_and_verify(&s, ApVariant::RightWeighted, 3).unwrap();
        assert!(r.spectrum_ok, "{r:?}");
        assert!(r.multiplicity_ok, "{r:?}");
        assert!((r.rho_t - r.rho_z).abs() <= 1e-6 * (1.0 + r.rho_z));
    }

    #[test]
    fn z_vanishes_for_periodic_constant_media() {
        let g = Grid::new(&[8, 8], &[0.125; 2]).unwrap().with_periodic(true);
        let mut m = MediaModel::homogeneous(g, 1.0, 4.0, 1.0).unwrap();
        m.gamma = vec![0.1; 64];
        let s = SaddleSystem::assemble(&m, 5.0).unwrap();
        let z = ZOperator::new(&s, 0.0, ApVariant::RightWeighted).unwrap();
        assert!(z.dense().max_abs() < 1e-9);
    }

    #[test]
    fn columns_match_apply() {
        let s = abc_system(8);
        let z = ZOperator::new(&s, 0.1, ApVariant::RightWeighted).unwrap();
        let d = z.dense();
        let v: Vec<C64> = (0..z.m()).map(|i| C64::new(i as f64, 1.0)).collect();
        let a = z.apply_vec(&v);
        let b = d.mul_vec(&v);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10 * (1.0 + a.iter().map(|x| x.norm()).fold(0.0, f64::max)));
    }
}
