//! Shi–Tomasi corner detection with non-maximum suppression and subpixel
//! refinement.
//!
//! The response is the smaller eigenvalue of the Gaussian-windowed structure
//! tensor of Sobel gradients. Scores are normalized by the image's maximum
//! response, so the strongest keypoint always scores 1.0. Low-score keypoints
//! are deliberately retained up to `max_count`: downstream verification uses
//! them as negative prompts.

use crate::error::{Error, Result};
use crate::filtering::smooth_buffer;
use crate::raster::Image2D;

use super::Keypoint;

/// Gaussian window for structure-tensor integration. Wide enough to fuse the
/// two edges of a corner, narrow enough to keep nearby corners separable.
const WINDOW_SIGMA: f64 = 1.0;

/// Minimum image side for detection.
const MIN_IMAGE_DIM: usize = 16;

/// Detect corners, strongest first.
///
/// Candidate pixels must exceed `min_score` (relative to the maximum
/// response), survive non-maximum suppression within `nms_radius`, and are
/// refined to subpixel positions by a quadratic fit of the response surface.
/// At most `max_count` keypoints are returned, sorted by descending score.
pub fn detect_keypoints(
    image: &Image2D,
    max_count: usize,
    nms_radius: usize,
    min_score: f64,
) -> Result<Vec<Keypoint>> {
    let (w, h) = image.dims();
    if w < MIN_IMAGE_DIM || h < MIN_IMAGE_DIM {
        return Err(Error::Parameter(format!(
            "image {w}x{h} too small for detection (minimum {MIN_IMAGE_DIM} per side)"
        )));
    }
    if max_count == 0 {
        return Ok(Vec::new());
    }

    let response = corner_response(image);
    let max_resp = response.iter().cloned().fold(0.0f64, f64::max);
    if max_resp <= 1e-12 {
        return Ok(Vec::new()); // constant image: no gradients, no corners
    }

    // Non-maximum suppression. Ties resolve to the first pixel in row-major
    // order so plateaus contribute exactly one keypoint.
    let r = nms_radius as i64;
    let mut keypoints = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = response[y * w + x];
            if v < min_score * max_resp || !image.masked_in(x, y) {
                continue;
            }
            let mut is_max = true;
            'nms: for dy in -r..=r {
                for dx in -r..=r {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nv = response[ny as usize * w + nx as usize];
                    if nv > v || (nv == v && (ny, nx) < (y as i64, x as i64)) {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if !is_max {
                continue;
            }
            let (sx, sy) = refine_subpixel(&response, w, x, y);
            keypoints.push(Keypoint::new(
                sx.clamp(0.0, (w - 1) as f64),
                sy.clamp(0.0, (h - 1) as f64),
                v / max_resp,
            ));
        }
    }

    keypoints.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(a.y.partial_cmp(&b.y).unwrap())
            .then(a.x.partial_cmp(&b.x).unwrap())
    });
    keypoints.truncate(max_count);
    Ok(keypoints)
}

/// Minimum-eigenvalue (Shi–Tomasi) response of the windowed structure tensor.
fn corner_response(image: &Image2D) -> Vec<f64> {
    let (w, h) = image.dims();
    let data = image.data();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];

    // Sobel gradients with edge-clamped indexing.
    let at = |x: i64, y: i64| -> f64 {
        let xc = x.clamp(0, w as i64 - 1) as usize;
        let yc = y.clamp(0, h as i64 - 1) as usize;
        data[yc * w + xc]
    };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1))
                / 8.0;
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1))
                / 8.0;
        }
    }

    let mut xx = vec![0.0; w * h];
    let mut yy = vec![0.0; w * h];
    let mut xy = vec![0.0; w * h];
    for i in 0..w * h {
        xx[i] = gx[i] * gx[i];
        yy[i] = gy[i] * gy[i];
        xy[i] = gx[i] * gy[i];
    }
    let sxx = smooth_buffer(&xx, w, h, WINDOW_SIGMA);
    let syy = smooth_buffer(&yy, w, h, WINDOW_SIGMA);
    let sxy = smooth_buffer(&xy, w, h, WINDOW_SIGMA);

    let mut response = vec![0.0; w * h];
    for i in 0..w * h {
        let half_trace = 0.5 * (sxx[i] + syy[i]);
        let root = (0.25 * (sxx[i] - syy[i]).powi(2) + sxy[i] * sxy[i]).sqrt();
        response[i] = (half_trace - root).max(0.0);
    }
    response
}

/// Quadratic fit of the 3×3 response neighborhood; the offset is clamped to
/// half a pixel so refinement never jumps to a different maximum.
fn refine_subpixel(response: &[f64], w: usize, x: usize, y: usize) -> (f64, f64) {
    let at = |xx: usize, yy: usize| response[yy * w + xx];
    let dx = 0.5 * (at(x + 1, y) - at(x - 1, y));
    let dy = 0.5 * (at(x, y + 1) - at(x, y - 1));
    let dxx = at(x + 1, y) - 2.0 * at(x, y) + at(x - 1, y);
    let dyy = at(x, y + 1) - 2.0 * at(x, y) + at(x, y - 1);
    let dxy = 0.25 * (at(x + 1, y + 1) - at(x - 1, y + 1) - at(x + 1, y - 1) + at(x - 1, y - 1));

    let det = dxx * dyy - dxy * dxy;
    if det.abs() < 1e-18 {
        return (x as f64, y as f64);
    }
    let ox = (-(dyy * dx - dxy * dy) / det).clamp(-0.5, 0.5);
    let oy = (-(dxx * dy - dxy * dx) / det).clamp(-0.5, 0.5);
    (x as f64 + ox, y as f64 + oy)
}
