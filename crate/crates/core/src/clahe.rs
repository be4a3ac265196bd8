//! Contrast-limited adaptive histogram equalization.
//!
//! The image is divided into a tile grid; each tile gets a clipped,
//! redistributed histogram whose CDF defines a tone mapping. Per-pixel output
//! bilinearly interpolates between the four surrounding tile mappings, which
//! removes tile seams. The clip limit is expressed relative to the uniform
//! bin height `tile_pixels / bins`, so `clip_limit = 1` flattens everything
//! and large values approach plain adaptive equalization.

use crate::error::{Error, Result};
use crate::raster::Image2D;

/// Histogram resolution used for equalization.
pub const CLAHE_BINS: usize = 256;

/// Default relative clip limit.
pub const DEFAULT_CLIP_LIMIT: f64 = 2.0;

/// Default tile grid.
pub const DEFAULT_TILES: usize = 8;

/// Contrast-limited adaptive histogram equalization with bilinear blending
/// between tile mappings. Deterministic; output intensities lie in `[0, 1]`.
pub fn clahe(img: &Image2D, clip_limit: f64, tiles_x: usize, tiles_y: usize) -> Result<Image2D> {
    if tiles_x < 1 || tiles_y < 1 {
        return Err(Error::Parameter("tile counts must be ≥ 1".into()));
    }
    if !(clip_limit > 0.0) {
        return Err(Error::Parameter(format!(
            "clip limit must be positive, got {clip_limit}"
        )));
    }
    let (w, h) = img.dims();
    if w < tiles_x || h < tiles_y {
        return Err(Error::Parameter(format!(
            "image {w}x{h} is smaller than the {tiles_x}x{tiles_y} tile grid"
        )));
    }

    // Per-tile tone mappings: CLAHE_BINS entries each, cdf(bin)/count.
    let mut mappings = vec![identity_mapping(); tiles_x * tiles_y];
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let x0 = tx * w / tiles_x;
            let x1 = (tx + 1) * w / tiles_x;
            let y0 = ty * h / tiles_y;
            let y1 = (ty + 1) * h / tiles_y;
            let mut hist = [0.0f64; CLAHE_BINS];
            let mut count = 0usize;
            for y in y0..y1 {
                for x in x0..x1 {
                    if !img.masked_in(x, y) {
                        continue;
                    }
                    hist[bin_of(img.get(x, y))] += 1.0;
                    count += 1;
                }
            }
            if count == 0 {
                continue; // fully masked tile keeps the identity ramp
            }
            clip_histogram(&mut hist, clip_limit, count);
            let mut cdf = 0.0;
            let mapping = mappings.get_mut(ty * tiles_x + tx).unwrap();
            for (b, m) in mapping.iter_mut().enumerate() {
                cdf += hist[b];
                *m = cdf / count as f64;
            }
        }
    }

    // Blend the four nearest tile mappings per pixel.
    let mut out = Image2D::zeros(w, h);
    for y in 0..h {
        let gy = (y as f64 + 0.5) * tiles_y as f64 / h as f64 - 0.5;
        let ty0 = gy.floor().clamp(0.0, (tiles_y - 1) as f64) as usize;
        let ty1 = (ty0 + 1).min(tiles_y - 1);
        let fy = (gy - ty0 as f64).clamp(0.0, 1.0);
        for x in 0..w {
            if !img.masked_in(x, y) {
                continue;
            }
            let gx = (x as f64 + 0.5) * tiles_x as f64 / w as f64 - 0.5;
            let tx0 = gx.floor().clamp(0.0, (tiles_x - 1) as f64) as usize;
            let tx1 = (tx0 + 1).min(tiles_x - 1);
            let fx = (gx - tx0 as f64).clamp(0.0, 1.0);

            let b = bin_of(img.get(x, y));
            let m00 = mappings[ty0 * tiles_x + tx0][b];
            let m10 = mappings[ty0 * tiles_x + tx1][b];
            let m01 = mappings[ty1 * tiles_x + tx0][b];
            let m11 = mappings[ty1 * tiles_x + tx1][b];
            let top = m00 * (1.0 - fx) + m10 * fx;
            let bot = m01 * (1.0 - fx) + m11 * fx;
            out.set(x, y, (top * (1.0 - fy) + bot * fy).clamp(0.0, 1.0));
        }
    }
    if let Some(mask) = img.mask() {
        out.set_mask(mask.to_vec())?;
    }
    Ok(out)
}

#[inline]
fn bin_of(v: f64) -> usize {
    ((v * CLAHE_BINS as f64) as usize).min(CLAHE_BINS - 1)
}

fn identity_mapping() -> [f64; CLAHE_BINS] {
    let mut m = [0.0; CLAHE_BINS];
    for (b, entry) in m.iter_mut().enumerate() {
        *entry = (b as f64 + 1.0) / CLAHE_BINS as f64;
    }
    m
}

/// Clip bins at `clip_limit × uniform height` and spread the excess evenly.
fn clip_histogram(hist: &mut [f64; CLAHE_BINS], clip_limit: f64, count: usize) {
    if !clip_limit.is_finite() {
        return;
    }
    let limit = (clip_limit * count as f64 / CLAHE_BINS as f64).max(1.0);
    let mut excess = 0.0;
    for bin in hist.iter_mut() {
        if *bin > limit {
            excess += *bin - limit;
            *bin = limit;
        }
    }
    if excess > 0.0 {
        let share = excess / CLAHE_BINS as f64;
        for bin in hist.iter_mut() {
            *bin += share;
        }
    }
}
