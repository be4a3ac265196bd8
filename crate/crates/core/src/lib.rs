//! Coarse-to-fine mosaicking of overlapping 2D grayscale fields.
//!
//! The pipeline aligns each moving field to a reference field in three
//! stages, then composites and verifies the result:
//!
//! 1. **Features** — corner detection, patch descriptors, and one-to-one
//!    matching (or ingestion of externally computed matches).
//! 2. **Bridge** — matched keypoints are rasterized into feature images with
//!    one unique intensity per pair, and a global-correlation affine
//!    registration aligns them; a least-squares fit initializes the search
//!    and a RANSAC homography serves as a comparison baseline.
//! 3. **Refinement** — symmetric diffeomorphic registration driven by a
//!    local normalized cross-correlation metric produces forward and inverse
//!    displacement fields.
//! 4. **Mosaic & verification** — fields are composited onto an expanded
//!    canvas, and alignment quality is scored by intensity metrics and by
//!    prompt-seeded segmentation consistency between reference and mosaic.
//!
//! A synthetic benchmark generator produces multi-field problems with known
//! ground-truth transforms from any grayscale source image.

pub mod affine;
pub mod clahe;
pub mod config;
pub mod deform;
pub mod error;
pub mod evalverify;
pub mod features;
pub mod field;
pub mod filtering;
pub mod geometry;
pub mod io;
pub mod mosaic;
pub mod phantom;
pub mod pipeline;
pub mod raster;
pub mod report;
pub mod synthbench;
pub mod warp;

pub use error::{Error, Result};
pub use field::DisplacementField;
pub use geometry::AffineTransform;
pub use raster::Image2D;
pub use warp::InterpKind;
