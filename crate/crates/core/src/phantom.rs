//! Deterministic synthetic test images.
//!
//! These generators provide reproducible sources for the synthetic benchmark
//! and for verification experiments: smooth textures, bright curvilinear
//! "vessel" phantoms on dark backgrounds, and straight-ridge patterns.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::filtering::smooth_buffer;
use crate::raster::Image2D;

/// Smooth random texture: value noise on a coarse grid, bilinearly upsampled
/// and lightly blurred, rescaled into `[low, high]`.
pub fn smooth_noise(width: usize, height: usize, cell: usize, seed: u64) -> Image2D {
    let cell = cell.max(2);
    let gw = width.div_ceil(cell) + 2;
    let gh = height.div_ceil(cell) + 2;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random_range(0.0..1.0)).collect();

    let mut data = vec![0.0; width * height];
    for y in 0..height {
        let gy = y as f64 / cell as f64;
        let y0 = gy.floor() as usize;
        let fy = gy - y0 as f64;
        for x in 0..width {
            let gx = x as f64 / cell as f64;
            let x0 = gx.floor() as usize;
            let fx = gx - x0 as f64;
            let g = |xx: usize, yy: usize| grid[yy * gw + xx];
            let top = g(x0, y0) * (1.0 - fx) + g(x0 + 1, y0) * fx;
            let bot = g(x0, y0 + 1) * (1.0 - fx) + g(x0 + 1, y0 + 1) * fx;
            data[y * width + x] = top * (1.0 - fy) + bot * fy;
        }
    }
    let data = smooth_buffer(&data, width, height, cell as f64 * 0.25);
    rescale(width, height, data, 0.1, 0.9)
}

/// Bright curvilinear vessel network on a dark smooth background.
///
/// Vessels are random-walk polylines with momentum, stamped with a Gaussian
/// cross-section and composited by max, then lightly blurred. The result has
/// plenty of crossings and bends for corner detectors to latch onto.
pub fn vessel_phantom(width: usize, height: usize, seed: u64) -> Image2D {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    // Dark low-contrast background.
    let bg = smooth_noise(width, height, (width.min(height) / 6).max(4), seed ^ 0x5eed);
    let mut data: Vec<f64> = bg.data().iter().map(|&v| 0.12 + 0.14 * v).collect();

    let n_vessels = ((width * height) / 2600).clamp(10, 60);
    let max_dim = width.max(height) as f64;
    for _ in 0..n_vessels {
        let mut x = rng.random_range(0.0..width as f64);
        let mut y = rng.random_range(0.0..height as f64);
        let mut dir = rng.random_range(0.0..std::f64::consts::TAU);
        let sigma = rng.random_range(0.8..1.8);
        let brightness = rng.random_range(0.65..0.95);
        let steps = rng.random_range((max_dim * 0.5) as usize..(max_dim * 1.3) as usize);
        for _ in 0..steps {
            stamp_gaussian(&mut data, width, height, x, y, sigma, brightness);
            dir += rng.random_range(-0.22..0.22);
            x += dir.cos();
            y += dir.sin();
            if x < -4.0 || y < -4.0 || x > width as f64 + 4.0 || y > height as f64 + 4.0 {
                break;
            }
        }
    }

    let data = smooth_buffer(&data, width, height, 0.6);
    let mut img = Image2D::from_vec(width, height, data).expect("finite phantom");
    img.clamp_unit();
    img
}

/// Straight ridge with a Gaussian cross-section from `a` to `b`, composited
/// onto the given image by max.
pub fn draw_ridge(img: &mut Image2D, a: (f64, f64), b: (f64, f64), sigma: f64, intensity: f64) {
    let (w, h) = img.dims();
    let (ax, ay) = a;
    let (bx, by) = b;
    let dx = bx - ax;
    let dy = by - ay;
    let len2 = dx * dx + dy * dy;
    let reach = (3.5 * sigma).ceil();
    let x0 = (ax.min(bx) - reach).floor().max(0.0) as usize;
    let x1 = ((ax.max(bx) + reach).ceil() as usize).min(w.saturating_sub(1));
    let y0 = (ay.min(by) - reach).floor().max(0.0) as usize;
    let y1 = ((ay.max(by) + reach).ceil() as usize).min(h.saturating_sub(1));
    for y in y0..=y1 {
        for x in x0..=x1 {
            let t = if len2 > 0.0 {
                (((x as f64 - ax) * dx + (y as f64 - ay) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let px = ax + t * dx;
            let py = ay + t * dy;
            let d2 = (x as f64 - px).powi(2) + (y as f64 - py).powi(2);
            let v = intensity * (-d2 / (2.0 * sigma * sigma)).exp();
            if v > img.get(x, y) {
                img.set(x, y, v);
            }
        }
    }
}

/// Two parallel horizontal ridges on a dark background; the standard
/// segmentation-sensitivity phantom.
pub fn two_ridge_phantom(width: usize, height: usize) -> Image2D {
    let mut img = Image2D::constant(width, height, 0.08);
    let ya = height as f64 * 0.33;
    let yb = height as f64 * 0.67;
    draw_ridge(
        &mut img,
        (width as f64 * 0.08, ya),
        (width as f64 * 0.92, ya),
        1.1,
        0.9,
    );
    draw_ridge(
        &mut img,
        (width as f64 * 0.08, yb),
        (width as f64 * 0.92, yb),
        1.1,
        0.9,
    );
    img
}

/// Checkerboard with square cells; corners sit at interior lattice crossings.
pub fn checkerboard(width: usize, height: usize, cell: usize) -> Image2D {
    Image2D::from_fn(width, height, |x, y| {
        if ((x / cell) + (y / cell)) % 2 == 0 {
            0.15
        } else {
            0.85
        }
    })
}

fn stamp_gaussian(
    data: &mut [f64],
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    sigma: f64,
    intensity: f64,
) {
    let reach = (3.0 * sigma).ceil() as i64;
    let xi = cx.round() as i64;
    let yi = cy.round() as i64;
    for y in (yi - reach).max(0)..=(yi + reach).min(height as i64 - 1) {
        for x in (xi - reach).max(0)..=(xi + reach).min(width as i64 - 1) {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            let v = intensity * (-d2 / (2.0 * sigma * sigma)).exp();
            let i = y as usize * width + x as usize;
            if v > data[i] {
                data[i] = v;
            }
        }
    }
}

fn rescale(width: usize, height: usize, data: Vec<f64>, low: f64, high: f64) -> Image2D {
    let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scaled = data
        .into_iter()
        .map(|v| low + (high - low) * (v - lo) / span)
        .collect();
    Image2D::from_vec(width, height, scaled).expect("finite rescale")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = vessel_phantom(96, 96, 7);
        let b = vessel_phantom(96, 96, 7);
        assert_eq!(a.data(), b.data());
        let c = vessel_phantom(96, 96, 8);
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn phantom_has_contrast_and_unit_range() {
        let img = vessel_phantom(128, 128, 3);
        let (lo, hi) = img.value_range().unwrap();
        assert!(lo >= 0.0 && hi <= 1.0);
        assert!(hi - lo > 0.4, "span {}", hi - lo);
    }

    #[test]
    fn ridge_peaks_on_its_axis() {
        let mut img = Image2D::constant(32, 32, 0.0);
        draw_ridge(&mut img, (4.0, 16.0), (28.0, 16.0), 1.0, 1.0);
        assert!(img.get(16, 16) > 0.99);
        assert!(img.get(16, 12) < 0.01);
    }
}
