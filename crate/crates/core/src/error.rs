//! Error type shared by all pipeline stages.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the mosaicking pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read `{path}`: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write `{path}`: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Unreadable or unsupported image content (wrong format, channels, depth).
    #[error("cannot load image `{path}`: {reason}")]
    Load { path: PathBuf, reason: String },

    /// A caller-supplied parameter violates an operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A transform is singular, non-invertible, or dimensions do not line up.
    #[error("geometry: {0}")]
    Geometry(String),

    /// A pyramid level would shrink below the minimum usable size.
    #[error("pyramid level too small: {width}x{height} (minimum {min} pixels per side)")]
    ScaleTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    /// Closed-form model fitting failed (degenerate point configuration).
    #[error("fit failed: {0}")]
    Fit(String),

    /// Iterative registration could not produce a usable result.
    #[error("registration failed: {0}")]
    Registration(String),

    /// Robust model estimation failed (too few matches, all hypotheses degenerate).
    #[error("estimation failed: {0}")]
    Estimation(String),

    /// A similarity or distance metric is undefined for the given inputs.
    #[error("metric undefined: {0}")]
    Metric(String),

    /// A structured file (matches, transform, field, manifest) is malformed.
    #[error("{path}: record {line}: {reason}")]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// Synthetic dataset generation cannot satisfy the requested layout.
    #[error("dataset generation: {0}")]
    Generation(String),

    /// Run configuration is invalid.
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
