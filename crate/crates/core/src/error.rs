use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mediary points (p1 = {p1}, p2 = {p2}): need 0 < p1 < p2 < 1")]
    InvalidMediaryPoints { p1: f64, p2: f64 },

    #[error("singular linear system (pivot column {column})")]
    SingularSystem { column: usize },

    #[error("normalized time {0} outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("shape mismatch: expected {expected} rows, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("spring {spring} has coincident endpoints")]
    DegenerateSpring { spring: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("CFL number {cfl:.3} exceeds 1 (max |u| = {max_velocity:e}, dt = {dt:e}, h = {h:e})")]
    CflViolation {
        cfl: f64,
        max_velocity: f64,
        dt: f64,
        h: f64,
    },

    #[error("simulation produced non-finite values at step {step}")]
    Diverged { step: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

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

pub type Result<T, E = Error> = std::result::Result<T, E>;
