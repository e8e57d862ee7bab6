use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring size must be at least 3, got {0}")]
    RingTooSmall(usize),

    #[error("disorder strength {0} outside [0, 1/2]")]
    DeltaOutOfRange(f64),

    #[error("disorder strength must be finite and non-negative, got {0}")]
    InvalidDelta(f64),

    #[error("cannot sample a realization for disorder kind `none`")]
    NoDisorderKind,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node {node} out of range for ring of {n} sites")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("symmetric eigensolver did not converge for N = {0}")]
    EigenNoConvergence(usize),

    #[error("Wigner function not real: imaginary residue {residue:e} exceeds {tolerance:e}")]
    NotReal { residue: f64, tolerance: f64 },

    #[error("realization {index} failed: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
