use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("normalized length-scale {lambda} is below the grid resolution bound {bound}")]
    ResolutionBound { lambda: f64, bound: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("rational activation hit a pole at {count} evaluation point(s)")]
    PoleHit { count: usize },

    #[error("activation `{0}` does not support complex evaluation")]
    UnsupportedActivation(String),

    #[error("backward pass requires a forward cache for the same batch")]
    MissingCache,

    #[error("non-finite loss")]
    NonFiniteLoss,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("constraint `{0}` is not supported here")]
    UnsupportedConstraint(String),

    #[error("checksum mismatch for {}", .0.display())]
    Checksum(PathBuf),

    #[error("unsupported format version `{0}`")]
    Version(String),

    #[error("malformed file {}: {msg}", .path.display())]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for failures caused by the numerics rather than by bad input or I/O.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence(_)
                | Error::Singular(_)
                | Error::NewtonDivergence { .. }
                | Error::PoleHit { .. }
                | Error::NonFiniteLoss
        )
    }
}
