//! Planar affine transforms.
//!
//! An [`AffineTransform`] is a 2×3 matrix mapping moving-image coordinates to
//! fixed-image coordinates: `p_fixed = A · p_moving + t`. All angles in the
//! public API are degrees.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Determinant magnitude below which a transform is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Determinant magnitude bounds for transforms accepted by the pipeline.
pub const PIPELINE_DET_RANGE: (f64, f64) = (1e-3, 1e3);

/// 2×3 affine transform, `p_fixed = A · p_moving + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub tx: f64,
    pub ty: f64,
}

impl AffineTransform {
    pub fn new(a11: f64, a12: f64, tx: f64, a21: f64, a22: f64, ty: f64) -> Self {
        AffineTransform {
            a11,
            a12,
            a21,
            a22,
            tx,
            ty,
        }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self::new(1.0, 0.0, tx, 0.0, 1.0, ty)
    }

    /// Rotation about the origin, counterclockwise in a y-down raster frame.
    pub fn rotation_deg(theta_deg: f64) -> Self {
        let (s, c) = theta_deg.to_radians().sin_cos();
        Self::new(c, -s, 0.0, s, c, 0.0)
    }

    /// Rotation about an arbitrary center point.
    pub fn rotation_about(theta_deg: f64, cx: f64, cy: f64) -> Self {
        let (s, c) = theta_deg.to_radians().sin_cos();
        Self::new(
            c,
            -s,
            cx - c * cx + s * cy,
            s,
            c,
            cy - s * cx - c * cy,
        )
    }

    pub fn scaling(s: f64) -> Self {
        Self::new(s, 0.0, 0.0, 0.0, s, 0.0)
    }

    /// Rigid transform: rotation about a center followed by a translation.
    pub fn rigid(theta_deg: f64, cx: f64, cy: f64, dx: f64, dy: f64) -> Self {
        let mut t = Self::rotation_about(theta_deg, cx, cy);
        t.tx += dx;
        t.ty += dy;
        t
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a11 * x + self.a12 * y + self.tx,
            self.a21 * x + self.a22 * y + self.ty,
        )
    }

    /// Composition `self ∘ other`: the result maps `p ↦ self(other(p))`.
    pub fn compose(&self, other: &AffineTransform) -> AffineTransform {
        AffineTransform {
            a11: self.a11 * other.a11 + self.a12 * other.a21,
            a12: self.a11 * other.a12 + self.a12 * other.a22,
            a21: self.a21 * other.a11 + self.a22 * other.a21,
            a22: self.a21 * other.a12 + self.a22 * other.a22,
            tx: self.a11 * other.tx + self.a12 * other.ty + self.tx,
            ty: self.a21 * other.tx + self.a22 * other.ty + self.ty,
        }
    }

    /// Inverse transform; fails when the linear part is near-singular.
    pub fn invert(&self) -> Result<AffineTransform> {
        let det = self.det();
        if det.abs() < SINGULAR_DET {
            return Err(Error::Geometry(format!(
                "affine transform is singular (det = {det:e})"
            )));
        }
        let inv_det = 1.0 / det;
        let b11 = self.a22 * inv_det;
        let b12 = -self.a12 * inv_det;
        let b21 = -self.a21 * inv_det;
        let b22 = self.a11 * inv_det;
        Ok(AffineTransform {
            a11: b11,
            a12: b12,
            a21: b21,
            a22: b22,
            tx: -(b11 * self.tx + b12 * self.ty),
            ty: -(b21 * self.tx + b22 * self.ty),
        })
    }

    /// Whether the determinant lies within the bounds the pipeline accepts.
    pub fn pipeline_valid(&self) -> bool {
        let d = self.det().abs();
        d >= PIPELINE_DET_RANGE.0 && d <= PIPELINE_DET_RANGE.1
    }

    /// Rotation angle (degrees) of the orthogonal polar factor of the linear
    /// part. Fails for orientation-reversing transforms.
    ///
    /// For `det > 0` the polar rotation maximizes `trace(Rᵀ·A)`, which gives
    /// `θ = atan2(a21 − a12, a11 + a22)` in closed form.
    pub fn rotation_angle_deg(&self) -> Result<f64> {
        if self.det() <= 0.0 {
            return Err(Error::Metric(
                "polar factor is a reflection (det ≤ 0); pipeline transforms must preserve orientation"
                    .into(),
            ));
        }
        Ok((self.a21 - self.a12).atan2(self.a11 + self.a22).to_degrees())
    }

    /// Maximum elementwise deviation from another transform (2×3 entries).
    pub fn max_abs_diff(&self, other: &AffineTransform) -> f64 {
        [
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
            self.tx - other.tx,
            self.ty - other.ty,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }

    // ── Transform file format ────────────────────────────────────────────────
    // UTF-8 text: header line `MOSAIC-AFFINE v1`, then one line with the six
    // coefficients `a11 a12 tx a21 a22 ty`.

    pub fn to_file_string(&self) -> String {
        let mut s = String::from("MOSAIC-AFFINE v1\n");
        let _ = writeln!(
            s,
            "{} {} {} {} {} {}",
            self.a11, self.a12, self.tx, self.a21, self.a22, self.ty
        );
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string()).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn from_file_string(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| format_err(path, 0, "empty transform file"))?;
        if header != "MOSAIC-AFFINE v1" {
            return Err(format_err(path, 1, "expected header `MOSAIC-AFFINE v1`"));
        }
        let (line_no, coeffs) = lines
            .next()
            .ok_or_else(|| format_err(path, 1, "missing coefficient line"))?;
        let values: Vec<f64> = coeffs
            .split_ascii_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format_err(path, line_no + 1, "malformed coefficient"))?;
        if values.len() != 6 {
            return Err(format_err(
                path,
                line_no + 1,
                &format!("expected 6 coefficients, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format_err(path, line_no + 1, "non-finite coefficient"));
        }
        let t = AffineTransform::new(
            values[0], values[1], values[2], values[3], values[4], values[5],
        );
        if t.det().abs() < SINGULAR_DET {
            return Err(format_err(path, line_no + 1, "singular transform"));
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_file_string(&text, path)
    }
}

fn format_err(path: &Path, line: usize, reason: &str) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    }
}
