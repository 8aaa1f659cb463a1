//! Three-dimensional setup: assembly checks, the layered synthetic model and
//! the default multigrid solve.

use crate::discretize::SaddleSystem;
use crate::error::{Error, Result};
use crate::experiments::{solve, Problem, SolveSetup};
use crate::grid::Grid;
use crate::krylov::{KrylovConfig, SolverReport};
use crate::media::{builtin_domain, MediaModel};

/// Mixed system of a 3D model; three displacement blocks on the x, y and z
/// faces and cell-centred pressure.
pub fn assemble_saddle_3d(media: &MediaModel, omega: f64) -> Result<SaddleSystem> {
    if media.grid.dim != 3 {
        return Err(Error::Dimension(format!("expected a 3D model, got dimension {}", media.grid.dim)));
    }
    SaddleSystem::assemble(media, omega)
}

/// Horizontally layered model on the built-in 3D domain: four layers of
/// increasing stiffness with depth.
pub fn layered_3d(cells: &[usize]) -> Result<MediaModel> {
    if cells.len() != 3 {
        return Err(Error::Dimension(format!("expected three cell counts, got {}", cells.len())));
    }
    let grid = Grid::on_domain(cells, &builtin_domain(3))?;
    let layout = grid.cell_layout();
    let nz = cells[2];
    let layers = [(1.8, 1.6, 0.8), (2.0, 2.2, 1.1), (2.3, 3.0, 1.5), (2.6, 3.8, 2.0)];
    let n = grid.n_cells();
    let (mut rho, mut vp, mut vs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for c in 0..n {
        let k = layout.coords(c)[2] * layers.len() / nz;
        (rho[c], vp[c], vs[c]) = layers[k];
    }
    MediaModel::from_velocities(grid, &rho, &vp, &vs)
}

/// Block-acoustic multigrid with the 3D defaults: W(2,2) Jacobi with
/// damping 0.8, 0.8, 0.2, mixed intergrid and GMRES(5).
pub fn solve_3d_default(problem: &Problem, levels: usize, alpha: f64) -> Result<SolverReport> {
    if problem.sys.dim() != 3 {
        return Err(Error::Dimension("solve_3d_default needs a 3D problem".into()));
    }
    problem.sys.grid.check_levels(levels)?;
    Ok(solve(problem, &SolveSetup::block_multigrid(3, levels, alpha, KrylovConfig::restarted(5)))?.report)
}
