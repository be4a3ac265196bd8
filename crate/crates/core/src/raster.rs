//! Dense 2D grayscale raster with an optional validity mask.
//!
//! Coordinates follow the raster convention used throughout the crate:
//! pixel centers at integer coordinates, `x` is the column, `y` is the row,
//! origin at the top-left. Data is stored row-major.

use crate::error::{Error, Result};

/// A dense 2D grayscale image.
///
/// Intensities are `f64`. Images produced by loading or preprocessing are
/// guaranteed to lie in `[0, 1]`; derived rasters (difference maps, Jacobian
/// determinants) may exceed that range. The optional mask marks observed
/// pixels; `None` means every pixel is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    width: usize,
    height: usize,
    data: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl Image2D {
    /// All-zero image with an all-true mask.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::constant(width, height, 0.0)
    }

    /// Constant-intensity image with an all-true mask.
    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Image2D {
            width,
            height,
            data: vec![value; width * height],
            mask: None,
        }
    }

    /// Wrap raw row-major data. Fails on length mismatch or non-finite values.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Parameter(format!(
                "image data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter(
                "image data contains non-finite values".into(),
            ));
        }
        Ok(Image2D {
            width,
            height,
            data,
            mask: None,
        })
    }

    /// Build from a per-pixel function evaluated at integer coordinates.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image2D {
            width,
            height,
            data,
            mask: None,
        }
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Validity of one pixel (true when no mask is attached).
    #[inline]
    pub fn masked_in(&self, x: usize, y: usize) -> bool {
        match &self.mask {
            Some(m) => m[y * self.width + x],
            None => true,
        }
    }

    #[inline]
    pub fn masked_in_idx(&self, i: usize) -> bool {
        match &self.mask {
            Some(m) => m[i],
            None => true,
        }
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// Materialized mask vector (all-true when no mask is attached).
    pub fn mask_vec(&self) -> Vec<bool> {
        match &self.mask {
            Some(m) => m.clone(),
            None => vec![true; self.data.len()],
        }
    }

    /// Attach a mask. Fails on length mismatch.
    pub fn set_mask(&mut self, mask: Vec<bool>) -> Result<()> {
        if mask.len() != self.data.len() {
            return Err(Error::Parameter(format!(
                "mask length {} does not match image size {}",
                mask.len(),
                self.data.len()
            )));
        }
        self.mask = Some(mask);
        Ok(())
    }

    pub fn clear_mask(&mut self) {
        self.mask = None;
    }

    /// Number of valid pixels.
    pub fn masked_count(&self) -> usize {
        match &self.mask {
            Some(m) => m.iter().filter(|&&b| b).count(),
            None => self.data.len(),
        }
    }

    /// Min and max intensity over valid pixels; `None` when no pixel is valid.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for (i, &v) in self.data.iter().enumerate() {
            if !self.masked_in_idx(i) {
                continue;
            }
            range = Some(match range {
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
                None => (v, v),
            });
        }
        range
    }

    /// Mean intensity over valid pixels; `None` when no pixel is valid.
    pub fn mean(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (i, &v) in self.data.iter().enumerate() {
            if self.masked_in_idx(i) {
                sum += v;
                n += 1;
            }
        }
        if n == 0 {
            None
        } else {
            Some(sum / n as f64)
        }
    }

    /// Clamp all intensities into `[0, 1]` in place.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }
}
