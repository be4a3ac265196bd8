//! Dense per-pixel displacement fields.
//!
//! A [`DisplacementField`] stores one 2-vector `(u, v)` in pixels per grid
//! point, on the fixed-image sampling grid, in the pull-back convention:
//! `warped(x, y) = moving(x + u(x, y), y + v(x, y))`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const FIELD_MAGIC: &[u8] = b"MOSAIC-FIELD v1\n";

/// Per-pixel 2D displacement field (pixels), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(width: usize, height: usize) -> Self {
        DisplacementField {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
        }
    }

    pub fn constant(width: usize, height: usize, u: f64, v: f64) -> Self {
        DisplacementField {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> (f64, f64),
    ) -> Self {
        let mut u = Vec::with_capacity(width * height);
        let mut v = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let (du, dv) = f(x, y);
                u.push(du);
                v.push(dv);
            }
        }
        DisplacementField {
            width,
            height,
            u,
            v,
        }
    }

    pub fn from_components(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != width * height || v.len() != width * height {
            return Err(Error::Parameter(
                "displacement component length mismatch".into(),
            ));
        }
        if u.iter().chain(v.iter()).any(|c| !c.is_finite()) {
            return Err(Error::Parameter(
                "displacement field contains non-finite values".into(),
            ));
        }
        Ok(DisplacementField {
            width,
            height,
            u,
            v,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, u: f64, v: f64) {
        let i = y * self.width + x;
        self.u[i] = u;
        self.v[i] = v;
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Bilinear sample with edge-clamped coordinates, so the field extends
    /// continuously beyond its grid.
    pub fn sample_clamped(&self, x: f64, y: f64) -> (f64, f64) {
        let xc = x.clamp(0.0, (self.width - 1) as f64);
        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xc.floor() as usize;
        let y0 = yc.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let idx = |xx: usize, yy: usize| yy * self.width + xx;
        let lerp2 = |c: &[f64]| -> f64 {
            let top = c[idx(x0, y0)] * (1.0 - fx) + c[idx(x1, y0)] * fx;
            let bot = c[idx(x0, y1)] * (1.0 - fx) + c[idx(x1, y1)] * fx;
            top * (1.0 - fy) + bot * fy
        };
        (lerp2(&self.u), lerp2(&self.v))
    }

    /// Largest displacement magnitude on the grid.
    pub fn max_magnitude(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| (u * u + v * v).sqrt())
            .fold(0.0, f64::max)
    }

    /// Mean displacement magnitude over interior grid points (one-pixel
    /// border excluded); falls back to the full grid when too small.
    pub fn mean_interior_magnitude(&self) -> f64 {
        let (w, h) = (self.width, self.height);
        let (x0, x1, y0, y1) = if w > 2 && h > 2 {
            (1, w - 1, 1, h - 1)
        } else {
            (0, w, 0, h)
        };
        let mut sum = 0.0;
        let mut n = 0usize;
        for y in y0..y1 {
            for x in x0..x1 {
                let (u, v) = self.get(x, y);
                sum += (u * u + v * v).sqrt();
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Resample to a new grid size, scaling displacements with the grid.
    ///
    /// Grid points are sampled with pixel-center alignment and displacement
    /// components are multiplied by the per-axis scale factor.
    pub fn resample(&self, new_width: usize, new_height: usize) -> DisplacementField {
        let sx = new_width as f64 / self.width as f64;
        let sy = new_height as f64 / self.height as f64;
        DisplacementField::from_fn(new_width, new_height, |x, y| {
            let ox = (x as f64 + 0.5) / sx - 0.5;
            let oy = (y as f64 + 0.5) / sy - 0.5;
            let (u, v) = self.sample_clamped(ox, oy);
            (u * sx, v * sy)
        })
    }

    // ── Field file format ────────────────────────────────────────────────────
    // Binary: ASCII magic `MOSAIC-FIELD v1\n`, then width and height as
    // unsigned 32-bit little-endian, then row-major (u, v) pairs of 32-bit
    // little-endian floats.

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf =
            Vec::with_capacity(FIELD_MAGIC.len() + 8 + self.u.len() * 8);
        buf.extend_from_slice(FIELD_MAGIC);
        buf.extend_from_slice(&(self.width as u32).to_le_bytes());
        buf.extend_from_slice(&(self.height as u32).to_le_bytes());
        for i in 0..self.u.len() {
            buf.extend_from_slice(&(self.u[i] as f32).to_le_bytes());
            buf.extend_from_slice(&(self.v[i] as f32).to_le_bytes());
        }
        std::fs::write(path, buf).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut r = std::io::BufReader::new(file);
        let ferr = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            line: 0,
            reason: reason.to_string(),
        };

        let mut magic = vec![0u8; FIELD_MAGIC.len()];
        r.read_exact(&mut magic)
            .map_err(|_| ferr("missing field header"))?;
        if magic != FIELD_MAGIC {
            return Err(ferr("expected header `MOSAIC-FIELD v1`"));
        }
        let mut dims = [0u8; 8];
        r.read_exact(&mut dims)
            .map_err(|_| ferr("truncated dimensions"))?;
        let width = u32::from_le_bytes(dims[0..4].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(dims[4..8].try_into().unwrap()) as usize;
        if width == 0 || height == 0 || width.saturating_mul(height) > (1 << 30) {
            return Err(ferr("implausible field dimensions"));
        }
        let n = width * height;
        let mut raw = vec![0u8; n * 8];
        r.read_exact(&mut raw).map_err(|_| ferr("truncated field data"))?;
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for pair in raw.chunks_exact(8) {
            let du = f32::from_le_bytes(pair[0..4].try_into().unwrap());
            let dv = f32::from_le_bytes(pair[4..8].try_into().unwrap());
            if !du.is_finite() || !dv.is_finite() {
                return Err(ferr("non-finite displacement"));
            }
            u.push(du as f64);
            v.push(dv as f64);
        }
        Self::from_components(width, height, u, v)
    }

    /// Serialize to the binary format in memory (for checksums and tests).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.write_all(FIELD_MAGIC).unwrap();
        buf.extend_from_slice(&(self.width as u32).to_le_bytes());
        buf.extend_from_slice(&(self.height as u32).to_le_bytes());
        for i in 0..self.u.len() {
            buf.extend_from_slice(&(self.u[i] as f32).to_le_bytes());
            buf.extend_from_slice(&(self.v[i] as f32).to_le_bytes());
        }
        buf
    }
}
