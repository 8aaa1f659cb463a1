use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 2D or 3D cell grid. The last axis is depth with index 0 at the
/// top surface. Unused trailing axes have one cell of unit spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub cells: [usize; 3],
    pub spacing: [f64; 3],
    #[serde(default)]
    pub periodic: bool,
}

impl Grid {
    /// Grid with every cell count at least four.
    pub fn new(cells: &[usize], spacing: &[f64]) -> Result<Self> {
        let g = Self::build(cells, spacing)?;
        if let Some(&n) = cells.iter().find(|&&n| n < 4) {
            return Err(Error::Grid(format!("cell count {n} is below 4")));
        }
        Ok(g)
    }

    /// Grid without the minimum-size rule, for operator-level checks on
    /// one or two cells and for coarse multigrid levels.
    pub fn small(cells: &[usize], spacing: &[f64]) -> Result<Self> {
        Self::build(cells, spacing)
    }

    fn build(cells: &[usize], spacing: &[f64]) -> Result<Self> {
        let dim = cells.len();
        if !(dim == 2 || dim == 3) || spacing.len() != dim {
            return Err(Error::Grid(format!("need 2 or 3 axes with matching spacings, got {} and {}", dim, spacing.len())));
        }
        if cells.contains(&0) {
            return Err(Error::Grid("empty axis".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Grid(format!("spacings must be positive, got {spacing:?}")));
        }
        let mut c = [1; 3];
        let mut h = [1.0; 3];
        c[..dim].copy_from_slice(cells);
        h[..dim].copy_from_slice(spacing);
        Ok(Self { dim, cells: c, spacing: h, periodic: false })
    }

    /// Uniform grid covering `[0, extent_a]` along each axis.
    pub fn on_domain(cells: &[usize], extent: &[f64]) -> Result<Self> {
        if cells.len() != extent.len() {
            return Err(Error::Grid("cells and extents differ in length".into()));
        }
        let h: Vec<f64> = cells.iter().zip(extent).map(|(&n, &e)| e / n as f64).collect();
        Self::new(cells, &h)
    }

    pub fn with_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn n_cells(&self) -> usize {
        self.cells[..self.dim].iter().product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing[..self.dim].iter().cloned().fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    /// Halves every axis and doubles spacings.
    pub fn coarsened(&self) -> Result<Self> {
        let mut g = *self;
        for a in 0..self.dim {
            if !self.cells[a].is_multiple_of(2) || self.cells[a] < 2 {
                return Err(Error::Grid(format!("axis {a} with {} cells cannot be coarsened", self.cells[a])));
            }
            g.cells[a] /= 2;
            g.spacing[a] *= 2.0;
        }
        Ok(g)
    }

    /// Doubles every axis and halves spacings.
    pub fn refined(&self) -> Self {
        let mut g = *self;
        for a in 0..self.dim {
            g.cells[a] *= 2;
            g.spacing[a] /= 2.0;
        }
        g
    }

    /// Checks that an `levels`-level hierarchy fits on this grid.
    pub fn check_levels(&self, levels: usize) -> Result<()> {
        if levels == 0 {
            return Err(Error::Grid("at least one level is required".into()));
        }
        let div = 1usize << (levels - 1);
        for a in 0..self.dim {
            if !self.cells[a].is_multiple_of(div) {
                return Err(Error::Grid(format!(
                    "axis {a} has {} cells, not divisible by 2^{} for {levels} levels",
                    self.cells[a],
                    levels - 1
                )));
            }
        }
        Ok(())
    }

    pub fn cell_layout(&self) -> Layout {
        Layout { dim: self.dim, cells: self.cells, nodal: [false; 3], periodic: self.periodic }
    }

    /// Layout of displacement component `k`, normal to faces of axis `k`.
    pub fn face_layout(&self, k: usize) -> Layout {
        self.cell_layout().toggled(k)
    }

    pub fn face_offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for k in 0..self.dim {
            off.push(off[k] + self.face_layout(k).len());
        }
        off
    }

    pub fn n_faces(&self) -> usize {
        *self.face_offsets().last().unwrap()
    }

    /// Index of the vertical displacement component.
    pub fn depth_axis(&self) -> usize {
        self.dim - 1
    }
}

/// Index layout of one staggered unknown family: per axis, either cell
/// centred (`n` entries) or nodal (`n + 1` entries, `n` when periodic).
/// Indices run x fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub dim: usize,
    pub cells: [usize; 3],
    pub nodal: [bool; 3],
    pub periodic: bool,
}

impl Layout {
    pub fn ext(&self, a: usize) -> usize {
        if a >= self.dim {
            1
        } else {
            self.cells[a] + usize::from(self.nodal[a] && !self.periodic)
        }
    }

    pub fn exts(&self) -> [usize; 3] {
        [self.ext(0), self.ext(1), self.ext(2)]
    }

    pub fn len(&self) -> usize {
        self.ext(0) * self.ext(1) * self.ext(2)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        i[0] + self.ext(0) * (i[1] + self.ext(1) * i[2])
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let (e0, e1) = (self.ext(0), self.ext(1));
        [idx % e0, (idx / e0) % e1, idx / (e0 * e1)]
    }

    /// Same layout with axis `a` switched between cell and nodal.
    pub fn toggled(&self, a: usize) -> Layout {
        let mut l = *self;
        l.nodal[a] = !l.nodal[a];
        l
    }

    /// Physical position of an entry, in cell units scaled by `spacing`.
    pub fn position(&self, idx: usize, spacing: &[f64; 3]) -> [f64; 3] {
        let c = self.coords(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            let off = if self.nodal[a] { 0.0 } else { 0.5 };
            p[a] = (c[a] as f64 + off) * spacing[a];
        }
        p
    }

    /// Layout on the grid coarsened by two along every axis.
    pub fn coarsened(&self) -> Layout {
        let mut l = *self;
        for a in 0..self.dim {
            l.cells[a] /= 2;
        }
        l
    }
}
