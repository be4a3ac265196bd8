//! Separable Gaussian smoothing and pyramid downsampling.
//!
//! Smoothing uses reflected boundaries so constants are preserved exactly.
//! When an image carries a mask, smoothing is mask-normalized: values are
//! weighted by validity and renormalized, so masked-out pixels never
//! contribute to masked-in outputs.

use crate::error::{Error, Result};
use crate::raster::Image2D;

/// Minimum usable pyramid dimension; smaller levels must be skipped.
pub const MIN_PYRAMID_DIM: usize = 4;

/// Normalized 1D Gaussian taps with radius `ceil(3σ)`; empty for σ = 0.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Reflect an index into `[0, n)` with half-sample symmetry
/// (`-1 → 0`, `n → n-1`), valid for any offset.
#[inline]
fn reflect(idx: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let mut m = idx % period;
    if m < 0 {
        m += period;
    }
    (if m < n { m } else { period - 1 - m }) as usize
}

fn convolve_rows(src: &[f64], w: usize, h: usize, taps: &[f64], dst: &mut [f64]) {
    let radius = (taps.len() / 2) as i64;
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sx = reflect(x as i64 + k as i64 - radius, w);
                acc += t * row[sx];
            }
            dst[y * w + x] = acc;
        }
    }
}

fn convolve_cols(src: &[f64], w: usize, h: usize, taps: &[f64], dst: &mut [f64]) {
    let radius = (taps.len() / 2) as i64;
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sy = reflect(y as i64 + k as i64 - radius, h);
                acc += t * src[sy * w + x];
            }
            dst[y * w + x] = acc;
        }
    }
}

/// Separable Gaussian smoothing of a raw buffer (no mask handling).
pub fn smooth_buffer(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let taps = gaussian_kernel(sigma);
    let mut tmp = vec![0.0; src.len()];
    let mut out = vec![0.0; src.len()];
    convolve_rows(src, w, h, &taps, &mut tmp);
    convolve_cols(&tmp, w, h, &taps, &mut out);
    out
}

/// Gaussian smoothing with kernel radius `ceil(3σ)` and reflected boundaries.
///
/// `sigma = 0` returns the input unchanged. With a mask present, output
/// values are the mask-weighted normalized convolution and the mask itself is
/// carried through; masked-out pixels are set to 0.
pub fn gaussian_smooth(img: &Image2D, sigma: f64) -> Result<Image2D> {
    if sigma < 0.0 {
        return Err(Error::Parameter(format!("negative sigma {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = img.dims();
    match img.mask() {
        None => {
            let out = smooth_buffer(img.data(), w, h, sigma);
            Image2D::from_vec(w, h, out)
        }
        Some(mask) => {
            let weights: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let weighted: Vec<f64> = img
                .data()
                .iter()
                .zip(&weights)
                .map(|(&v, &m)| v * m)
                .collect();
            let num = smooth_buffer(&weighted, w, h, sigma);
            let den = smooth_buffer(&weights, w, h, sigma);
            let data = num
                .iter()
                .zip(&den)
                .zip(mask)
                .map(|((&n, &d), &m)| if m && d > 0.0 { n / d } else { 0.0 })
                .collect();
            let mut out = Image2D::from_vec(w, h, data)?;
            out.set_mask(mask.to_vec())?;
            Ok(out)
        }
    }
}

/// Gaussian presmooth followed by decimation of every `shrink`-th pixel.
///
/// Output dimensions are `ceil(dim / shrink)`. `shrink = 1, sigma = 0` is the
/// identity. Fails when a resulting dimension drops below
/// [`MIN_PYRAMID_DIM`]; callers skip such pyramid levels.
pub fn downsample(img: &Image2D, shrink: usize, presmooth_sigma: f64) -> Result<Image2D> {
    if shrink == 0 {
        return Err(Error::Parameter("shrink factor must be ≥ 1".into()));
    }
    let (w, h) = img.dims();
    let ow = w.div_ceil(shrink);
    let oh = h.div_ceil(shrink);
    if ow < MIN_PYRAMID_DIM || oh < MIN_PYRAMID_DIM {
        return Err(Error::ScaleTooSmall {
            width: ow,
            height: oh,
            min: MIN_PYRAMID_DIM,
        });
    }
    let smoothed = gaussian_smooth(img, presmooth_sigma)?;
    if shrink == 1 {
        return Ok(smoothed);
    }
    let mut out = Image2D::zeros(ow, oh);
    let mut mask = img.mask().map(|_| vec![false; ow * oh]);
    for y in 0..oh {
        for x in 0..ow {
            out.set(x, y, smoothed.get(x * shrink, y * shrink));
            if let Some(m) = &mut mask {
                m[y * ow + x] = smoothed.masked_in(x * shrink, y * shrink);
            }
        }
    }
    if let Some(m) = mask {
        out.set_mask(m)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_zero_is_identity() {
        let img = Image2D::from_fn(7, 5, |x, y| ((x * 3 + y) % 7) as f64 / 7.0);
        let out = gaussian_smooth(&img, 0.0).unwrap();
        assert_eq!(out.data(), img.data());
    }

    #[test]
    fn constant_is_preserved() {
        let img = Image2D::constant(16, 16, 0.37);
        for sigma in [0.5, 1.0, 3.0, 10.0] {
            let out = gaussian_smooth(&img, sigma).unwrap();
            for &v in out.data() {
                assert!((v - 0.37).abs() < 1e-12, "sigma {sigma}: {v}");
            }
        }
    }

    #[test]
    fn impulse_center_matches_kernel_product() {
        // After smoothing a unit impulse, the center equals the squared
        // center tap of the normalized 1D kernel (separability).
        let n = 15;
        let mut img = Image2D::zeros(n, n);
        img.set(7, 7, 1.0);
        let out = gaussian_smooth(&img, 1.0).unwrap();

        let sigma: f64 = 1.0;
        let radius = (3.0 * sigma).ceil() as i64;
        let weights: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let center = weights[radius as usize] / weights.iter().sum::<f64>();
        assert!((out.get(7, 7) - center * center).abs() < 1e-6);
    }

    #[test]
    fn smoothing_never_expands_range() {
        let img = Image2D::from_fn(20, 20, |x, y| {
            0.5 + 0.5 * ((x as f64 * 1.3).sin() * (y as f64 * 0.7).cos())
        });
        let (lo, hi) = img.value_range().unwrap();
        for sigma in [0.8, 2.0, 5.0] {
            let out = gaussian_smooth(&img, sigma).unwrap();
            let (olo, ohi) = out.value_range().unwrap();
            assert!(olo >= lo - 1e-9);
            assert!(ohi <= hi + 1e-9);
        }
    }

    #[test]
    fn masked_smoothing_ignores_invalid_pixels() {
        let mut img = Image2D::constant(12, 12, 0.5);
        let mut mask = vec![true; 144];
        // A block of wild values that is masked out must not leak.
        for y in 0..4 {
            for x in 0..4 {
                img.set(x, y, 1000.0);
                mask[y * 12 + x] = false;
            }
        }
        img.set_mask(mask).unwrap();
        let out = gaussian_smooth(&img, 2.0).unwrap();
        for y in 0..12 {
            for x in 0..12 {
                if out.masked_in(x, y) {
                    assert!((out.get(x, y) - 0.5).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn downsample_identity_and_dims() {
        let img = Image2D::from_fn(8, 8, |x, y| (x + y) as f64 / 14.0);
        let same = downsample(&img, 1, 0.0).unwrap();
        assert_eq!(same.data(), img.data());
        let half = downsample(&img, 2, 0.0).unwrap();
        assert_eq!(half.dims(), (4, 4));
    }

    #[test]
    fn downsample_preserves_constant() {
        let img = Image2D::constant(32, 24, 0.61);
        let out = downsample(&img, 3, 1.5).unwrap();
        assert_eq!(out.dims(), (11, 8));
        for &v in out.data() {
            assert!((v - 0.61).abs() < 1e-12);
        }
    }

    #[test]
    fn downsample_rejects_tiny_result() {
        let img = Image2D::constant(8, 8, 0.0);
        assert!(matches!(
            downsample(&img, 4, 0.0),
            Err(Error::ScaleTooSmall { .. })
        ));
    }
}
