use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{average_cells_to, average_field, face_average, gradient_blocks, weighted_laplacian};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::media::MediaModel;
use crate::sparse::CsrMatrix;

type C64 = Complex64;

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

/// `ρ(1 - iγ/ω)` for matching density and attenuation arrays.
pub fn attenuated_mass(rho: &[f64], gamma: &[f64], omega: f64) -> Result<Vec<C64>> {
    if omega == 0.0 && gamma.iter().any(|&g| g > 0.0) {
        return Err(Error::Domain("attenuation is undefined at zero frequency".into()));
    }
    Ok(rho
        .iter()
        .zip(gamma)
        .map(|(&r, &g)| if g == 0.0 { C64::new(r, 0.0) } else { C64::new(r, -r * g / omega) })
        .collect())
}

/// One acoustic block `Σ_l D_lᵀ diag(A μ) D_l - ω² diag(A_f ρ ⊙ (1 - i A_f γ / ω))`
/// on the faces of displacement component `k`.
pub fn assemble_block(media: &MediaModel, omega: f64, k: usize) -> Result<CsrMatrix> {
    let g = &media.grid;
    if k >= g.dim {
        return Err(Error::Dimension(format!("component {k} on a {}D grid", g.dim)));
    }
    let avg = average_cells_to(g, &g.face_layout(k));
    let m = attenuated_mass(&average_field(&avg, &media.rho), &average_field(&avg, &media.gamma), omega)?;
    let lap = weighted_laplacian(g, k, &media.mu);
    Ok(lap.add_diag(&m.iter().map(|v| -omega * omega * v).collect::<Vec<_>>()))
}

/// The mixed-form system `[[A, G], [Gᵀ, -C]]` and its ingredients.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub grid: Grid,
    pub omega: f64,
    /// Acoustic blocks of `A`, one per displacement component.
    pub blocks: Vec<CsrMatrix>,
    /// Laplacian parts of the blocks (no mass term).
    pub lap_blocks: Vec<CsrMatrix>,
    /// Per-component gradients; `G` stacks them.
    pub grads: Vec<CsrMatrix>,
    pub g: CsrMatrix,
    pub gt: CsrMatrix,
    /// Diagonal of `C = diag(1/(λ+μ))`.
    pub c: Vec<f64>,
    /// Face mass `M = A_f ρ ⊙ (1 - i A_f γ/ω)`, all faces.
    pub mass_faces: Vec<C64>,
    /// Face-averaged density, all faces (shift mass of the blocks).
    pub rho_faces: Vec<f64>,
    /// Cell mass `M_p = ρ(1 - iγ/ω)`.
    pub mass_cells: Vec<C64>,
    pub media: MediaModel,
    pub n: usize,
    pub m: usize,
    pub face_offsets: Vec<usize>,
}

impl SaddleSystem {
    pub fn assemble(media: &MediaModel, omega: f64) -> Result<Self> {
        media.validate()?;
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("omega = {omega} must be positive")));
        }
        let grid = media.grid;
        let rho_faces = face_average(&grid, &media.rho);
        let gamma_faces = face_average(&grid, &media.gamma);
        let mass_faces = attenuated_mass(&rho_faces, &gamma_faces, omega)?;
        let mass_cells = attenuated_mass(&media.rho, &media.gamma, omega)?;
        let face_offsets = grid.face_offsets();
        let w2 = omega * omega;
        let mut blocks = Vec::with_capacity(grid.dim);
        let mut lap_blocks = Vec::with_capacity(grid.dim);
        for k in 0..grid.dim {
            let lap = weighted_laplacian(&grid, k, &media.mu);
            let shift: Vec<C64> = mass_faces[face_offsets[k]..face_offsets[k + 1]].iter().map(|v| -w2 * v).collect();
            blocks.push(lap.add_diag(&shift));
            lap_blocks.push(lap);
        }
        let grads = gradient_blocks(&grid);
        let refs: Vec<&CsrMatrix> = grads.iter().collect();
        let g = CsrMatrix::vstack(&refs)?;
        let gt = g.transpose();
        let c = media.lambda.iter().zip(&media.mu).map(|(l, m)| 1.0 / (l + m)).collect();
        Ok(Self {
            grid,
            omega,
            blocks,
            lap_blocks,
            grads,
            n: g.nrows(),
            m: g.ncols(),
            g,
            gt,
            c,
            mass_faces,
            rho_faces,
            mass_cells,
            media: media.clone(),
            face_offsets,
        })
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    /// Block-diagonal leading block `A`.
    pub fn a(&self) -> CsrMatrix {
        let refs: Vec<&CsrMatrix> = self.blocks.iter().collect();
        CsrMatrix::block_diag(&refs)
    }

    pub fn c_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_diag(&real(&self.c))
    }

    /// Full saddle-point matrix `[[A, G], [Gᵀ, -C]]`.
    pub fn matrix(&self) -> CsrMatrix {
        self.matrix_with_blocks(&self.blocks)
    }

    /// Saddle matrix with replacement leading blocks (e.g. shifted ones).
    pub fn matrix_with_blocks(&self, blocks: &[CsrMatrix]) -> CsrMatrix {
        let refs: Vec<&CsrMatrix> = blocks.iter().collect();
        let a = CsrMatrix::block_diag(&refs);
        let negc = CsrMatrix::from_diag(&self.c.iter().map(|&v| C64::new(-v, 0.0)).collect::<Vec<_>>());
        CsrMatrix::block(&[vec![Some(&a), Some(&self.g)], vec![Some(&self.gt), Some(&negc)]], &[self.n, self.m], &[self.n, self.m])
            .expect("saddle blocks have consistent sizes")
    }

    /// Face range of component `k` inside the displacement vector.
    pub fn component_range(&self, k: usize) -> std::ops::Range<usize> {
        self.face_offsets[k]..self.face_offsets[k + 1]
    }

    /// Shift mass of block `k`: face-averaged density.
    pub fn block_shift_mass(&self, k: usize) -> &[f64] {
        &self.rho_faces[self.component_range(k)]
    }

    /// Shift mass of `H_p`: `ρ/(λ+μ)`.
    pub fn hp_shift_mass(&self) -> Vec<f64> {
        self.media.rho.iter().zip(&self.c).map(|(r, c)| r * c).collect()
    }
}

/// Placement of the shear weight in the pressure-space operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ApVariant {
    /// `GᵀG diag(μ) - ω² M_p`.
    #[default]
    RightWeighted,
    /// `Gᵀ diag(A_f μ) G - ω² M_p`.
    FaceAveraged,
}

/// Laplacian part of `A_p` for the chosen variant.
pub fn build_ap_laplacian(sys: &SaddleSystem, variant: ApVariant) -> CsrMatrix {
    match variant {
        ApVariant::RightWeighted => {
            let gtg = sys.gt.matmul(&sys.g).expect("G chains");
            gtg.scale_cols(&real(&sys.media.mu))
        }
        ApVariant::FaceAveraged => {
            let w = real(&face_average(&sys.grid, &sys.media.mu));
            sys.gt.scale_cols(&w).matmul(&sys.g).expect("G chains")
        }
    }
}

/// Pressure-space surrogate `A_p`.
pub fn build_ap(sys: &SaddleSystem, variant: ApVariant) -> CsrMatrix {
    let w2 = sys.omega * sys.omega;
    build_ap_laplacian(sys, variant).add_diag(&sys.mass_cells.iter().map(|v| -w2 * v).collect::<Vec<_>>())
}

/// `H_p = GᵀG + A_p C`.
pub fn build_hp(sys: &SaddleSystem, ap: &CsrMatrix) -> CsrMatrix {
    let gtg = sys.gt.matmul(&sys.g).expect("G chains");
    gtg.add(&ap.scale_cols(&real(&sys.c))).expect("cell operators")
}

/// Commutator `Ξ = GᵀA - A_p Gᵀ` with its split `Ξ = Ξ_lap - Ξ_mass`.
#[derive(Debug, Clone)]
pub struct Commutator {
    pub xi: CsrMatrix,
    pub lap: CsrMatrix,
    pub mass: CsrMatrix,
}

pub fn build_commutator(sys: &SaddleSystem, variant: ApVariant) -> Commutator {
    let refs: Vec<&CsrMatrix> = sys.lap_blocks.iter().collect();
    let lap_a = CsrMatrix::block_diag(&refs);
    let lap_p = build_ap_laplacian(sys, variant);
    let lap = sys.gt.matmul(&lap_a).unwrap().sub(&lap_p.matmul(&sys.gt).unwrap()).unwrap();
    let w2 = C64::new(sys.omega * sys.omega, 0.0);
    let mass = sys
        .gt
        .scale_cols(&sys.mass_faces)
        .sub(&sys.gt.scale_rows(&sys.mass_cells))
        .unwrap()
        .scale(w2);
    let xi = lap.sub(&mass).unwrap();
    Commutator { xi, lap, mass }
}

/// Complex shift `H + iαω² diag(m_s)`, adding artificial attenuation in the
/// sign convention used here (positive Laplacian, `+iωγρ` damping).
pub fn apply_shift(h: &CsrMatrix, m_s: &[f64], alpha: f64, omega: f64) -> Result<CsrMatrix> {
    if m_s.len() != h.nrows() || h.nrows() != h.ncols() {
        return Err(Error::Dimension(format!("shift of length {} for {}x{} operator", m_s.len(), h.nrows(), h.ncols())));
    }
    if alpha == 0.0 {
        return Ok(h.clone());
    }
    let s = alpha * omega * omega;
    Ok(h.add_diag(&m_s.iter().map(|&v| C64::new(0.0, s * v)).collect::<Vec<_>>()))
}

/// Saddle matrix with only the leading block shifted.
pub fn shifted_saddle(sys: &SaddleSystem, alpha: f64) -> Result<CsrMatrix> {
    let blocks = (0..sys.dim())
        .map(|k| apply_shift(&sys.blocks[k], sys.block_shift_mass(k), alpha, sys.omega))
        .collect::<Result<Vec<_>>>()?;
    Ok(sys.matrix_with_blocks(&blocks))
}

/// Unit point source of strength `1/(Π h)` on the vertical-displacement
/// face at the top centre; pressure rows are zero.
pub fn point_source(grid: &Grid) -> Vec<C64> {
    let offs = grid.face_offsets();
    let k = grid.depth_axis();
    let l = grid.face_layout(k);
    let mut c = [0usize; 3];
    for a in 0..grid.dim - 1 {
        c[a] = (grid.cells[a] - 1) / 2;
    }
    let mut rhs = vec![C64::new(0.0, 0.0); offs[grid.dim] + grid.n_cells()];
    rhs[offs[k] + l.index(c)] = C64::new(1.0 / grid.cell_volume(), 0.0);
    rhs
}
