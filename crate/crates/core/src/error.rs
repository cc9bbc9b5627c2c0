use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("graph is disconnected: vertices {0} and {1} are unreachable from each other")]
    Disconnected(usize, usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matching orientation: first spectrum has {0} entries, second has {1}; need n1 <= n2")]
    Orientation(usize, usize),
    #[error("brute-force matching limited to n2 <= {limit}, got {got}")]
    SizeLimit { limit: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),
    #[error("orthogonality constraint violated: |P^T P - I|_F = {0:e}")]
    Constraint(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("truncated data: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
