//! EHGRID media files, binary field dumps and PPM heatmaps.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Layout};
use crate::media::{ElasticRules, MediaModel};

type C64 = Complex64;

/// Rows added below a model by [`EhGrid::extend_bottom`] by default.
pub const BOTTOM_EXTENSION: usize = 16;

/// Density and wave speeds on a cell grid, as stored in an EHGRID file.
#[derive(Debug, Clone, PartialEq)]
pub struct EhGrid {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub vp: Vec<f64>,
    pub vs: Vec<f64>,
}

impl EhGrid {
    pub fn new(grid: Grid, rho: Vec<f64>, vp: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        let n = grid.n_cells();
        if rho.len() != n || vp.len() != n || vs.len() != n {
            return Err(Error::Model(format!("fields must have {n} entries")));
        }
        Ok(Self { grid, rho, vp, vs })
    }

    /// Density and shear speed derived from a pressure-speed field.
    pub fn from_vp(grid: Grid, vp: Vec<f64>, rules: ElasticRules) -> Result<Self> {
        let rho = vp.iter().map(|v| rules.rho_slope * v + rules.rho_offset).collect();
        let vs = vp.iter().map(|v| rules.vs_ratio * v).collect();
        Self::new(grid, rho, vp, vs)
    }

    pub fn from_media(media: &MediaModel) -> Self {
        let (vp, vs) = media.velocities();
        Self { grid: media.grid, rho: media.rho.clone(), vp, vs }
    }

    /// Lamé model with zero attenuation.
    pub fn to_media(&self) -> Result<MediaModel> {
        MediaModel::from_velocities(self.grid, &self.rho, &self.vp, &self.vs)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::Format("missing header line".into()))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("header is not text".into()))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.first() != Some(&"EHGRID") {
            return Err(Error::Format("header must start with EHGRID".into()));
        }
        let dim: usize = tok.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| Error::Format("bad dimension".into()))?;
        if !(dim == 2 || dim == 3) || tok.len() != 2 + 2 * dim {
            return Err(Error::Format(format!("header '{header}' does not match dimension")));
        }
        let cells: Vec<usize> = tok[2..2 + dim]
            .iter()
            .map(|t| t.parse().map_err(|_| Error::Format(format!("bad cell count '{t}'"))))
            .collect::<Result<_>>()?;
        let h: Vec<f64> = tok[2 + dim..]
            .iter()
            .map(|t| t.parse().map_err(|_| Error::Format(format!("bad spacing '{t}'"))))
            .collect::<Result<_>>()?;
        let grid = Grid::small(&cells, &h).map_err(|e| Error::Format(e.to_string()))?;
        let n = grid.n_cells();
        let body = &bytes[nl + 1..];
        if body.len() != 3 * 8 * n {
            return Err(Error::Format(format!("expected {} data bytes, found {}", 24 * n, body.len())));
        }
        let field = |k: usize| -> Vec<f64> {
            body[k * 8 * n..(k + 1) * 8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect()
        };
        Self::new(grid, field(0), field(1), field(2))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = &self.grid;
        let d = g.dim;
        let mut head = format!("EHGRID {d}");
        for a in 0..d {
            head += &format!(" {}", g.cells[a]);
        }
        for a in 0..d {
            head += &format!(" {}", g.spacing[a]);
        }
        head.push('\n');
        let mut out = head.into_bytes();
        for f in [&self.rho, &self.vp, &self.vs] {
            for v in f {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Appends `rows` copies of the deepest layer below the model.
    pub fn extend_bottom(&self, rows: usize) -> Result<Self> {
        let g = &self.grid;
        let depth = g.dim - 1;
        let mut cells = g.cells[..g.dim].to_vec();
        cells[depth] += rows;
        let ng = Grid::small(&cells, &g.spacing[..g.dim])?;
        let (old, new) = (g.cell_layout(), ng.cell_layout());
        let pick = |f: &Vec<f64>| -> Vec<f64> {
            (0..new.len())
                .map(|c| {
                    let mut i = new.coords(c);
                    i[depth] = i[depth].min(g.cells[depth] - 1);
                    f[old.index(i)]
                })
                .collect()
        };
        Self::new(ng, pick(&self.rho), pick(&self.vp), pick(&self.vs))
    }
}

/// Little-endian float64 pairs (re, im) in storage order.
pub fn complex_to_bytes(v: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * v.len());
    for z in v {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn complex_from_bytes(b: &[u8]) -> Result<Vec<C64>> {
    if !b.len().is_multiple_of(16) {
        return Err(Error::Format(format!("{} bytes is not a whole number of complex values", b.len())));
    }
    Ok(b.chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect())
}

/// Grayscale P6 image of a field's magnitude on `layout`. Row 0 is the top
/// surface. In 3D the vertical section through the middle of the second
/// axis is drawn.
pub fn ppm_bytes(layout: &Layout, values: &[C64], log_scale: bool) -> Vec<u8> {
    let e = layout.exts();
    let depth = layout.dim - 1;
    let (w, h) = (e[0], e[depth]);
    let mut mag = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let mut i = [c, 0, 0];
            if layout.dim == 3 {
                i[1] = e[1] / 2;
            }
            i[depth] = r;
            let m = values[layout.index(i)].norm();
            mag.push(if log_scale { (m + f64::MIN_POSITIVE).log10() } else { m });
        }
    }
    let lo = mag.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    for m in mag {
        let g = (255.0 * (m - lo) / span).round().clamp(0.0, 255.0) as u8;
        out.extend_from_slice(&[g, g, g]);
    }
    out
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EhGrid {
        let g = Grid::new(&[5, 4], &[0.5, 0.25]).unwrap();
        let vp: Vec<f64> = (0..20).map(|i| 2.0 + i as f64 * 0.1).collect();
        EhGrid::from_vp(g, vp, ElasticRules::default()).unwrap()
    }

    #[test]
    fn conversion_rules() {
        let g = Grid::small(&[1, 1], &[1.0, 1.0]).unwrap();
        let e = EhGrid::from_vp(g, vec![6.0], ElasticRules::default()).unwrap();
        assert!((e.rho[0] - 2.7).abs() < 1e-12 && e.vs[0] == 3.0);
        let m = e.to_media().unwrap();
        assert!((m.mu[0] - 24.3).abs() < 1e-12 && (m.lambda[0] - 48.6).abs() < 1e-12);
    }

    #[test]
    fn roundtrip_and_header() {
        let e = sample();
        let b = e.to_bytes();
        assert!(b.starts_with(b"EHGRID 2 5 4 0.5 0.25\n"));
        assert_eq!(EhGrid::parse(&b).unwrap(), e);
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(EhGrid::parse(&bad), Err(Error::Format(_))));
        assert!(EhGrid::parse(&b[..b.len() - 1]).is_err());
        assert!(EhGrid::parse(b"EHGRID 2 5 4 0.5\n").is_err());
    }

    #[test]
    fn bottom_extension_replicates_last_row() {
        let e = sample();
        let x = e.extend_bottom(BOTTOM_EXTENSION).unwrap();
        assert_eq!(x.grid.cells[1], 4 + BOTTOM_EXTENSION);
        let (lo, ln) = (e.grid.cell_layout(), x.grid.cell_layout());
        for i in 0..5 {
            for j in 0..x.grid.cells[1] {
                assert_eq!(x.vp[ln.index([i, j, 0])], e.vp[lo.index([i, j.min(3), 0])]);
            }
        }
    }

    #[test]
    fn complex_and_ppm() {
        let v = vec![C64::new(1.5, -2.0), C64::new(0.0, 3.25)];
        assert_eq!(complex_from_bytes(&complex_to_bytes(&v)).unwrap(), v);
        let g = Grid::new(&[4, 4], &[1.0, 1.0]).unwrap();
        let l = g.face_layout(0);
        let vals: Vec<C64> = (0..l.len()).map(|i| C64::new(i as f64, 0.0)).collect();
        let img = ppm_bytes(&l, &vals, false);
        let head = b"P6\n5 4\n255\n";
        assert!(img.starts_with(head));
        assert_eq!(img.len(), head.len() + 3 * 20);
        assert_eq!(img[head.len()], 0);
        assert_eq!(*img.last().unwrap(), 255);
    }
}
