use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh ({invariant}): {detail}")]
    InvalidMesh { invariant: &'static str, detail: String },

    #[error("{path}:{line}: parse error: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },

    #[error("iterative solver stalled after {iterations} iterations (relative residual {residual:.3e})")]
    IterativeSolve { iterations: usize, residual: f64 },

    #[error("coefficient tensor has negative eigenvalue {eigenvalue:.3e} on triangle {triangle}")]
    IndefiniteCoefficient { triangle: usize, eigenvalue: f64 },

    #[error("mesh has no interior vertices")]
    NoInteriorVertices,

    #[error("degenerate iterate: {0}")]
    DegenerateIterate(&'static str),

    #[error("invalid lambda branch: slope vanished at r = {r}")]
    InvalidBranch { r: f64 },

    #[error("shooting bracket [{lo}, {hi}] does not enclose a root")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("point ({x}, {y}) lies outside the unit disk")]
    OutsideDisk { x: f64, y: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn mesh(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidMesh {
            invariant,
            detail: detail.into(),
        }
    }
}
