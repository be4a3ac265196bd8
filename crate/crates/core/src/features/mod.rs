//! Keypoint detection, description, matching, and match interchange.
//!
//! The built-in path is classical: Shi–Tomasi corners with subpixel
//! refinement, SIFT-like gradient-histogram patch descriptors (no rotation
//! invariance), and mutual-nearest-neighbor matching with a ratio test.
//! Externally computed matches (e.g. from learned matchers) enter through the
//! line-oriented `MOSAIC-MATCHES v1` interchange format and flow through the
//! rest of the pipeline identically.

mod describe;
mod detect;
mod interchange;
mod matching;

pub use describe::{describe, Descriptor, DESCRIPTOR_DIM};
pub use detect::detect_keypoints;
pub use interchange::{export_matches, import_matches};
pub use matching::match_descriptors;

use crate::error::{Error, Result};
use crate::raster::Image2D;

/// Detected feature point with subpixel position and detector confidence.
///
/// Scores from the built-in detector are normalized so the strongest
/// keypoint in an image scores 1.0; imported keypoints keep whatever scale
/// their matcher produced (relevant for the negative-prompt threshold).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, score: f64) -> Self {
        Keypoint { x, y, score }
    }
}

/// One fixed↔moving correspondence with a confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub fixed_idx: usize,
    pub moving_idx: usize,
    pub confidence: f64,
}

/// Validated set of one-to-one keypoint correspondences between two images.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    fixed_dims: (usize, usize),
    moving_dims: (usize, usize),
    fixed_keypoints: Vec<Keypoint>,
    moving_keypoints: Vec<Keypoint>,
    pairs: Vec<MatchPair>,
}

impl MatchSet {
    /// Build and validate a match set.
    ///
    /// Enforces: indices in range, one-to-one pairing, finite confidences,
    /// and keypoints inside their image bounds with finite non-negative
    /// scores.
    pub fn new(
        fixed_dims: (usize, usize),
        moving_dims: (usize, usize),
        fixed_keypoints: Vec<Keypoint>,
        moving_keypoints: Vec<Keypoint>,
        mut pairs: Vec<MatchPair>,
    ) -> Result<Self> {
        validate_keypoints(&fixed_keypoints, fixed_dims, "fixed")?;
        validate_keypoints(&moving_keypoints, moving_dims, "moving")?;
        let mut seen_fixed = vec![false; fixed_keypoints.len()];
        let mut seen_moving = vec![false; moving_keypoints.len()];
        for p in &pairs {
            if p.fixed_idx >= fixed_keypoints.len() || p.moving_idx >= moving_keypoints.len() {
                return Err(Error::Parameter(format!(
                    "match index ({}, {}) out of range",
                    p.fixed_idx, p.moving_idx
                )));
            }
            if !p.confidence.is_finite() {
                return Err(Error::Parameter("non-finite match confidence".into()));
            }
            if seen_fixed[p.fixed_idx] {
                return Err(Error::Parameter(format!(
                    "fixed keypoint {} matched more than once",
                    p.fixed_idx
                )));
            }
            if seen_moving[p.moving_idx] {
                return Err(Error::Parameter(format!(
                    "moving keypoint {} matched more than once",
                    p.moving_idx
                )));
            }
            seen_fixed[p.fixed_idx] = true;
            seen_moving[p.moving_idx] = true;
        }
        pairs.sort_by_key(|p| p.fixed_idx);
        Ok(MatchSet {
            fixed_dims,
            moving_dims,
            fixed_keypoints,
            moving_keypoints,
            pairs,
        })
    }

    pub fn fixed_dims(&self) -> (usize, usize) {
        self.fixed_dims
    }

    pub fn moving_dims(&self) -> (usize, usize) {
        self.moving_dims
    }

    pub fn fixed_keypoints(&self) -> &[Keypoint] {
        &self.fixed_keypoints
    }

    pub fn moving_keypoints(&self) -> &[Keypoint] {
        &self.moving_keypoints
    }

    /// Pairs sorted by fixed keypoint index.
    pub fn pairs(&self) -> &[MatchPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Matched point coordinates as `((xf, yf), (xm, ym))` per pair.
    pub fn point_pairs(&self) -> Vec<((f64, f64), (f64, f64))> {
        self.pairs
            .iter()
            .map(|p| {
                let f = self.fixed_keypoints[p.fixed_idx];
                let m = self.moving_keypoints[p.moving_idx];
                ((f.x, f.y), (m.x, m.y))
            })
            .collect()
    }

    /// Swap fixed and moving roles.
    pub fn swapped(&self) -> MatchSet {
        MatchSet {
            fixed_dims: self.moving_dims,
            moving_dims: self.fixed_dims,
            fixed_keypoints: self.moving_keypoints.clone(),
            moving_keypoints: self.fixed_keypoints.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| MatchPair {
                    fixed_idx: p.moving_idx,
                    moving_idx: p.fixed_idx,
                    confidence: p.confidence,
                })
                .collect(),
        }
    }
}

fn validate_keypoints(kps: &[Keypoint], dims: (usize, usize), side: &str) -> Result<()> {
    let (w, h) = dims;
    if w == 0 || h == 0 {
        return Err(Error::Parameter(format!("{side} image has zero extent")));
    }
    for (i, k) in kps.iter().enumerate() {
        if !k.x.is_finite() || !k.y.is_finite() || !k.score.is_finite() || k.score < 0.0 {
            return Err(Error::Parameter(format!(
                "{side} keypoint {i} has non-finite coordinates or negative score"
            )));
        }
        if k.x < 0.0 || k.y < 0.0 || k.x > (w - 1) as f64 || k.y > (h - 1) as f64 {
            return Err(Error::Parameter(format!(
                "{side} keypoint {i} at ({}, {}) outside {w}x{h}",
                k.x, k.y
            )));
        }
    }
    Ok(())
}

/// Detector and matcher settings for the built-in classical path.
#[derive(Debug, Clone)]
pub struct FeatureParams {
    pub max_count: usize,
    pub nms_radius: usize,
    pub min_score: f64,
    pub ratio: f64,
    pub min_cosine: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            max_count: 1024,
            nms_radius: 4,
            min_score: 0.05,
            ratio: 0.9,
            min_cosine: 0.6,
        }
    }
}

/// Full built-in matching path: detect, describe, and match two images.
pub fn match_features(
    fixed: &Image2D,
    moving: &Image2D,
    params: &FeatureParams,
) -> Result<MatchSet> {
    let kps_f = detect_keypoints(fixed, params.max_count, params.nms_radius, params.min_score)?;
    let kps_m = detect_keypoints(moving, params.max_count, params.nms_radius, params.min_score)?;
    let desc_f = describe(fixed, &kps_f);
    let desc_m = describe(moving, &kps_m);
    let pairs = match_descriptors(&desc_f, &desc_m, params.ratio, params.min_cosine);
    MatchSet::new(fixed.dims(), moving.dims(), kps_f, kps_m, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom;
    use crate::warp::{warp_affine, InterpKind};
    use crate::AffineTransform;

    #[test]
    fn matchset_rejects_duplicate_indices() {
        let kps = vec![Keypoint::new(1.0, 1.0, 1.0), Keypoint::new(2.0, 2.0, 0.5)];
        let pairs = vec![
            MatchPair {
                fixed_idx: 0,
                moving_idx: 0,
                confidence: 1.0,
            },
            MatchPair {
                fixed_idx: 0,
                moving_idx: 1,
                confidence: 0.8,
            },
        ];
        assert!(MatchSet::new((8, 8), (8, 8), kps.clone(), kps, pairs).is_err());
    }

    #[test]
    fn matchset_rejects_out_of_bounds_keypoint() {
        let kps = vec![Keypoint::new(9.0, 1.0, 1.0)];
        assert!(MatchSet::new((8, 8), (8, 8), kps.clone(), kps, vec![]).is_err());
    }

    #[test]
    fn rotated_pair_matches_against_ground_truth() {
        // Descriptors of an image vs its 10°-rotated warp: at least half the
        // keypoints should match, and ≥90% of matches should land within
        // 2 px of the ground-truth correspondence.
        let img = phantom::vessel_phantom(200, 200, 11);
        let t = AffineTransform::rotation_about(10.0, 100.0, 100.0);
        let warped = warp_affine(&img, &t, InterpKind::Bilinear, 0.0).unwrap();

        let params = FeatureParams {
            max_count: 400,
            ..FeatureParams::default()
        };
        let ms = match_features(&img, &warped, &params).unwrap();
        let n_kp = ms.fixed_keypoints().len().min(ms.moving_keypoints().len());
        assert!(n_kp >= 40, "too few keypoints: {n_kp}");
        assert!(
            ms.len() * 2 >= n_kp,
            "matched {} of {} keypoints",
            ms.len(),
            n_kp
        );

        // t maps moving coords to fixed coords; a fixed keypoint matched to a
        // moving keypoint should satisfy t(moving) ≈ fixed.
        let mut good = 0usize;
        for ((fx, fy), (mx, my)) in ms.point_pairs() {
            let (px, py) = t.apply(mx, my);
            if ((px - fx).powi(2) + (py - fy).powi(2)).sqrt() <= 2.0 {
                good += 1;
            }
        }
        assert!(
            good as f64 >= 0.9 * ms.len() as f64,
            "{good}/{} matches within 2 px",
            ms.len()
        );
    }

    #[test]
    fn match_symmetry_under_role_swap() {
        let a = phantom::vessel_phantom(160, 160, 21);
        let t = AffineTransform::rigid(6.0, 80.0, 80.0, 4.0, -2.0);
        let b = warp_affine(&a, &t, InterpKind::Bilinear, 0.0).unwrap();
        let params = FeatureParams::default();
        let ab = match_features(&a, &b, &params).unwrap();
        let ba = match_features(&b, &a, &params).unwrap();
        let mut ab_pairs: Vec<(usize, usize)> = ab
            .pairs()
            .iter()
            .map(|p| (p.fixed_idx, p.moving_idx))
            .collect();
        let mut ba_swapped: Vec<(usize, usize)> = ba
            .pairs()
            .iter()
            .map(|p| (p.moving_idx, p.fixed_idx))
            .collect();
        ab_pairs.sort_unstable();
        ba_swapped.sort_unstable();
        assert_eq!(ab_pairs, ba_swapped);
    }

    #[test]
    fn detection_is_deterministic() {
        let img = phantom::vessel_phantom(128, 128, 5);
        let p = FeatureParams::default();
        let a = detect_keypoints(&img, p.max_count, p.nms_radius, p.min_score).unwrap();
        let b = detect_keypoints(&img, p.max_count, p.nms_radius, p.min_score).unwrap();
        assert_eq!(a, b);
    }
}
