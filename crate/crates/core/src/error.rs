use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single violated invariant found while validating a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("covariance is not positive semidefinite (pivot {pivot} failed with jitter up to {max_jitter:e})")]
    NonPositiveSemidefinite { pivot: usize, max_jitter: f64 },

    #[error("time {time} is not a node of the tabulated kernel")]
    OutOfDomain { time: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("total degree {degree} exceeds the moment degree cap {cap}")]
    DegreeCapExceeded { degree: u32, cap: u32 },

    #[error("response moment history has {available} nodes, index {requested} requested")]
    HistoryTooShort { available: usize, requested: usize },

    #[error("variance {variance} at t={time} is not positive")]
    DegenerateVariance { time: f64, variance: f64 },

    #[error("one-step mass drift {drift:e} at t={time} exceeds {limit:e}")]
    Instability { time: f64, drift: f64, limit: f64 },

    #[error("path {path} left |x| <= {guard:e} at t={time}")]
    Blowup { path: usize, time: f64, guard: f64 },

    #[error("pdf snapshots live on different grids")]
    GridMismatch,

    #[error("invalid {what}: {reason}")]
    InvalidInput { what: String, reason: String },

    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        message: String,
    },

    #[error("{} violated invariant(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            what: what.into(),
            reason: reason.into(),
        }
    }
}
