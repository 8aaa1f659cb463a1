use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Cell-centred physical coefficients on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MediaModel {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Poisson ratio λ / (2(λ+μ)).
pub fn poisson_ratio(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda + mu > 0.0) {
        return Err(Error::Domain(format!("lambda + mu = {} is not positive", lambda + mu)));
    }
    Ok(lambda / (2.0 * (lambda + mu)))
}

/// Pressure and shear wave speeds.
pub fn wave_velocities(rho: f64, lambda: f64, mu: f64) -> (f64, f64) {
    (((lambda + 2.0 * mu) / rho).sqrt(), (mu / rho).sqrt())
}

/// Density and shear-speed rules applied to a pressure-speed field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticRules {
    pub rho_slope: f64,
    pub rho_offset: f64,
    pub vs_ratio: f64,
}

impl Default for ElasticRules {
    fn default() -> Self {
        Self { rho_slope: 0.25, rho_offset: 1.2, vs_ratio: 0.5 }
    }
}

impl MediaModel {
    pub fn new(grid: Grid, rho: Vec<f64>, lambda: Vec<f64>, mu: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        let m = Self { grid, rho, lambda, mu, gamma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n_cells();
        for (name, f) in [("rho", &self.rho), ("lambda", &self.lambda), ("mu", &self.mu), ("gamma", &self.gamma)] {
            if f.len() != n {
                return Err(Error::Model(format!("{name} has {} entries, grid has {n} cells", f.len())));
            }
        }
        for c in 0..n {
            let (r, l, m, g) = (self.rho[c], self.lambda[c], self.mu[c], self.gamma[c]);
            if !(r > 0.0) {
                return Err(Error::Model(format!("rho = {r} at cell {c}")));
            }
            if !(m >= 0.0) || !(g >= 0.0) {
                return Err(Error::Model(format!("negative mu or gamma at cell {c}")));
            }
            if !(l + m > 0.0) {
                return Err(Error::Model(format!("lambda + mu = {} at cell {c}", l + m)));
            }
            if m > 0.0 {
                let s = l / (2.0 * (l + m));
                if !(s > 0.0 && s < 0.5) {
                    return Err(Error::Model(format!("Poisson ratio {s} out of (0, 0.5) at cell {c}")));
                }
            }
        }
        Ok(())
    }

    /// Homogeneous model with the given coefficients and zero attenuation.
    pub fn homogeneous(grid: Grid, rho: f64, lambda: f64, mu: f64) -> Result<Self> {
        let n = grid.n_cells();
        Self::new(grid, vec![rho; n], vec![lambda; n], vec![mu; n], vec![0.0; n])
    }

    /// Builds (ρ, λ, μ) from a pressure-speed field.
    pub fn elastic_from_acoustic(grid: Grid, vp: &[f64], rules: ElasticRules) -> Result<Self> {
        if vp.len() != grid.n_cells() {
            return Err(Error::Model("vp length does not match grid".into()));
        }
        let mut rho = Vec::with_capacity(vp.len());
        let mut vs = Vec::with_capacity(vp.len());
        for (c, &v) in vp.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::Model(format!("vp = {v} at cell {c}")));
            }
            rho.push(rules.rho_slope * v + rules.rho_offset);
            vs.push(rules.vs_ratio * v);
        }
        Self::from_velocities(grid, &rho, vp, &vs)
    }

    /// Builds (ρ, λ, μ) from density and wave speeds.
    pub fn from_velocities(grid: Grid, rho: &[f64], vp: &[f64], vs: &[f64]) -> Result<Self> {
        let mu: Vec<f64> = rho.iter().zip(vs).map(|(r, s)| r * s * s).collect();
        let lambda: Vec<f64> = rho.iter().zip(vp).zip(&mu).map(|((r, p), m)| r * p * p - 2.0 * m).collect();
        let n = grid.n_cells();
        Self::new(grid, rho.to_vec(), lambda, mu, vec![0.0; n])
    }

    pub fn velocities(&self) -> (Vec<f64>, Vec<f64>) {
        (0..self.rho.len())
            .map(|c| wave_velocities(self.rho[c], self.lambda[c], self.mu[c]))
            .unzip()
    }

    pub fn poisson_ratios(&self) -> Vec<f64> {
        self.lambda.iter().zip(&self.mu).map(|(&l, &m)| l / (2.0 * (l + m))).collect()
    }

    /// Cell index from per-axis coordinates.
    pub fn cell(&self, i: [usize; 3]) -> usize {
        self.grid.cell_layout().index(i)
    }

    /// Top-left anchored sub-model of `cells` (depth measured from the top).
    pub fn slice(&self, cells: &[usize]) -> Result<Self> {
        let g = &self.grid;
        if cells.len() != g.dim || (0..g.dim).any(|a| cells[a] > g.cells[a] || cells[a] == 0) {
            return Err(Error::Grid(format!("slice {cells:?} does not fit grid {:?}", &g.cells[..g.dim])));
        }
        let sub = Grid::small(cells, &g.spacing[..g.dim])?.with_periodic(g.periodic);
        let sl = sub.cell_layout();
        let pick = |f: &Vec<f64>| (0..sl.len()).map(|c| f[self.cell(sl.coords(c))]).collect::<Vec<_>>();
        Ok(Self {
            grid: sub,
            rho: pick(&self.rho),
            lambda: pick(&self.lambda),
            mu: pick(&self.mu),
            gamma: pick(&self.gamma),
        })
    }
}

/// Built-in synthetic media.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinMedia {
    Homogeneous,
    Linear,
}

impl std::str::FromStr for BuiltinMedia {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(Self::Homogeneous),
            "linear" => Ok(Self::Linear),
            _ => Err(Error::Config(format!("unknown builtin media '{s}'"))),
        }
    }
}

/// Physical extent of the built-in models: 16 wide, 5 deep.
pub fn builtin_domain(dim: usize) -> Vec<f64> {
    if dim == 3 {
        vec![16.0, 16.0, 5.0]
    } else {
        vec![16.0, 5.0]
    }
}

/// Built-in model on `cells` covering the standard domain. `lambda_factor`
/// scales λ pointwise.
pub fn builtin_media(name: BuiltinMedia, cells: &[usize], lambda_factor: f64) -> Result<MediaModel> {
    let grid = Grid::on_domain(cells, &builtin_domain(cells.len()))?;
    let n = grid.n_cells();
    let layout = grid.cell_layout();
    let depth = grid.depth_axis();
    let nd = grid.cells[depth];
    let (mut rho, mut lambda, mut mu) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        let (r, l, m) = match name {
            BuiltinMedia::Homogeneous => (1.0, 16.0, 1.0),
            BuiltinMedia::Linear => {
                let t = if nd > 1 { layout.coords(c)[depth] as f64 / (nd - 1) as f64 } else { 0.0 };
                (2.0 + t, 4.0 + 16.0 * t, 1.0 + 14.0 * t)
            }
        };
        rho[c] = r;
        lambda[c] = l * lambda_factor;
        mu[c] = m;
    }
    MediaModel::new(grid, rho, lambda, mu, vec![0.0; n])
}

/// Frequency chosen so the slowest shear speed gets `gs_target` points per
/// wavelength on the coarsest axis spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaSelection {
    pub omega: f64,
    /// Set when μ vanishes everywhere and V_p was used instead.
    pub from_vp: bool,
}

pub fn select_omega(media: &MediaModel, gs_target: f64) -> Result<OmegaSelection> {
    if !(gs_target > 0.0) {
        return Err(Error::Config(format!("gs_target = {gs_target}")));
    }
    let (vp, vs) = media.velocities();
    let min_vs = vs.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let (v, from_vp) = if min_vs.is_finite() {
        (min_vs, false)
    } else {
        (vp.iter().cloned().fold(f64::INFINITY, f64::min), true)
    };
    Ok(OmegaSelection { omega: 2.0 * PI * v / (gs_target * media.grid.max_spacing()), from_vp })
}

/// Sponge-layer attenuation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbcParams {
    pub width: usize,
    pub gamma0: f64,
    pub gamma_max: f64,
    /// Absorbing flag per axis side, `[low, high]`; index 0 of the depth
    /// axis is the top surface.
    pub sides: [[bool; 2]; 3],
}

impl Default for AbcParams {
    fn default() -> Self {
        Self { width: 20, gamma0: 0.01 * PI, gamma_max: 2.0 * PI, sides: [[true; 2]; 3] }
    }
}

impl AbcParams {
    /// Same parameters with the width reduced to fit `grid`.
    pub fn fitted(&self, grid: &Grid) -> Self {
        let min_n = grid.cells[..grid.dim].iter().cloned().min().unwrap_or(1);
        Self { width: self.width.min(min_n.saturating_sub(1) / 2), ..*self }
    }
}

/// Overwrites γ with the sponge profile γ0 + γmax((L−d)/L)² inside the
/// layer and γ0 elsewhere, where d is the cell distance to the nearest
/// absorbing side.
pub fn apply_abc(media: &MediaModel, abc: &AbcParams) -> Result<MediaModel> {
    let g = &media.grid;
    let l = abc.width;
    for a in 0..g.dim {
        if l > 0 && 2 * l >= g.cells[a] {
            return Err(Error::Config(format!(
                "absorbing layer of {l} cells overlaps itself on axis {a} with {} cells",
                g.cells[a]
            )));
        }
    }
    if !(abc.gamma0 >= 0.0 && abc.gamma_max >= 0.0) {
        return Err(Error::Config("attenuation values must be non-negative".into()));
    }
    let layout = g.cell_layout();
    let mut out = media.clone();
    for c in 0..layout.len() {
        let i = layout.coords(c);
        let mut d = usize::MAX;
        for a in 0..g.dim {
            if abc.sides[a][0] {
                d = d.min(i[a]);
            }
            if abc.sides[a][1] {
                d = d.min(g.cells[a] - 1 - i[a]);
            }
        }
        out.gamma[c] = if d < l {
            let r = (l - d) as f64 / l as f64;
            abc.gamma0 + abc.gamma_max * r * r
        } else {
            abc.gamma0
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_examples() {
        assert!((poisson_ratio(16.0, 1.0).unwrap() - 0.4706).abs() < 5e-4);
        assert_eq!(poisson_ratio(0.0, 1.0).unwrap(), 0.0);
        assert!((poisson_ratio(16000.0, 1.0).unwrap() - 0.49997).abs() < 1e-5);
        assert!(poisson_ratio(-1.0, 1.0).is_err());
    }

    #[test]
    fn velocity_examples() {
        let (vp, vs) = wave_velocities(1.0, 16.0, 1.0);
        assert!((vp - 18f64.sqrt()).abs() < 1e-15 && vs == 1.0);
        assert_eq!(wave_velocities(2.0, 3.0, 0.0).1, 0.0);
    }

    #[test]
    fn elastic_conversion() {
        let g = Grid::new(&[4, 4], &[1.0, 1.0]).unwrap();
        let m = MediaModel::elastic_from_acoustic(g, &[6.0; 16], ElasticRules::default()).unwrap();
        assert!((m.rho[0] - 2.7).abs() < 1e-14);
        assert!((m.mu[0] - 24.3).abs() < 1e-12);
        assert!((m.lambda[0] - 48.6).abs() < 1e-12);
        let (_, vs) = m.velocities();
        assert!((vs[0] - 3.0).abs() < 1e-14);
        let m4 = MediaModel::elastic_from_acoustic(g, &[4.0; 16], ElasticRules::default()).unwrap();
        assert!((m4.poisson_ratios()[3] - 1.0 / 3.0).abs() < 1e-14);
        let mut vp = vec![6.0; 16];
        vp[5] = 0.0;
        assert!(MediaModel::elastic_from_acoustic(g, &vp, ElasticRules::default()).is_err());
    }

    #[test]
    fn builtin_ranges() {
        let h = builtin_media(BuiltinMedia::Homogeneous, &[128, 64], 1.0).unwrap();
        assert!(h.poisson_ratios().iter().all(|s| (s - 0.4706).abs() < 5e-4));
        let l = builtin_media(BuiltinMedia::Linear, &[32, 16], 1.0).unwrap();
        let max = l.poisson_ratios().into_iter().fold(0.0, f64::max);
        assert!((max - 0.4).abs() < 1e-12);
        let l = builtin_media(BuiltinMedia::Linear, &[32, 16], 1000.0).unwrap();
        assert!(l.poisson_ratios().into_iter().fold(0.0, f64::max) >= 0.4996);
        assert!("granite".parse::<BuiltinMedia>().is_err());
    }

    #[test]
    fn omega_rule() {
        let g = Grid::new(&[200, 64], &[0.08, 0.08]).unwrap();
        let m = MediaModel::homogeneous(g, 1.0, 16.0, 1.0).unwrap();
        let w = select_omega(&m, 10.0).unwrap();
        assert!((w.omega - 2.0 * PI / 0.8).abs() < 1e-12 && !w.from_vp);
        // points per shear wavelength: (2π V_s / ω) / h
        assert!(((2.0 * PI / w.omega) / 0.08 - 10.0).abs() < 1e-12);
        let fine = MediaModel::homogeneous(g.refined(), 1.0, 16.0, 1.0).unwrap();
        assert_eq!(select_omega(&fine, 10.0).unwrap().omega, 2.0 * w.omega);
        let fluid = MediaModel::homogeneous(g, 1.0, 16.0, 0.0).unwrap();
        assert!(select_omega(&fluid, 10.0).unwrap().from_vp);
    }

    #[test]
    fn abc_profile() {
        let g = Grid::new(&[64, 48], &[1.0, 1.0]).unwrap();
        let m = MediaModel::homogeneous(g, 1.0, 16.0, 1.0).unwrap();
        let abc = AbcParams::default();
        let a = apply_abc(&m, &abc).unwrap();
        assert!((a.gamma[m.cell([32, 24, 0])] - 0.01 * PI).abs() < 1e-15);
        assert!((a.gamma[m.cell([0, 24, 0])] - (0.01 * PI + 2.0 * PI)).abs() < 1e-15);
        assert!((a.gamma[m.cell([20, 24, 0])] - 0.01 * PI).abs() < 1e-15);
        assert_eq!(apply_abc(&a, &abc).unwrap(), a);
        for i in 1..32 {
            assert!(a.gamma[m.cell([i, 24, 0])] <= a.gamma[m.cell([i - 1, 24, 0])]);
        }
        let small = MediaModel::homogeneous(Grid::new(&[32, 16], &[1.0, 1.0]).unwrap(), 1.0, 16.0, 1.0).unwrap();
        assert!(apply_abc(&small, &abc).is_err());
        assert_eq!(abc.fitted(&small.grid).width, 7);
    }

    #[test]
    fn slicing() {
        let l = builtin_media(BuiltinMedia::Linear, &[32, 16], 1.0).unwrap();
        assert_eq!(l.slice(&[32, 16]).unwrap(), l);
        let s = l.slice(&[8, 8]).unwrap();
        assert_eq!(s.grid.n_cells(), 64);
        assert_eq!(s.mu[s.cell([3, 5, 0])], l.mu[l.cell([0, 5, 0])]);
        assert!(l.slice(&[33, 4]).is_err());
    }
}
