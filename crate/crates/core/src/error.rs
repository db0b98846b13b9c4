use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite entry at index {index} of state vector")]
    NonFinite { index: usize },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("controller singularity: {0}")]
    ControllerSingularity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "bisection bracket [{lo}, {hi}] does not straddle a class change (both ends: {class})"
    )]
    Bracket { lo: f64, hi: f64, class: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(
        "unknown plot kind `{0}` (expected states-vs-time, energy-vs-time or phase3d-projection)"
    )]
    UnknownPlotKind(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
