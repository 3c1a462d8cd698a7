use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("malformed image file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("patch at ({row}, {col}) with side {side} does not fit a {width}x{height} image")]
    Bounds {
        row: usize,
        col: usize,
        side: usize,
        width: usize,
        height: usize,
    },

    #[error("pixel ({row}, {col}) is not covered by any patch")]
    Coverage { row: usize, col: usize },

    #[error("eigensolver did not converge (dim {dim}, residual {residual:e})")]
    NoConvergence { dim: usize, residual: f64 },

    #[error("no fit constants for {model} noise with {side}x{side} patches")]
    Lookup { model: String, side: usize },

    #[error("subspace dimension {d} is within 0.5 of the pole {pole} of the F-factor rule")]
    Singularity { d: usize, pole: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
