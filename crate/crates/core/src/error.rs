use std::fmt;

use thiserror::Error;

/// A single violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub field: &'static str,
    pub message: String,
}

impl ValidationError {
    pub(crate) fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {}", join(.0))]
    Validation(Vec<ValidationError>),

    #[error("scenario file: {0}")]
    Config(String),

    #[error("zero-length vector where a direction is required")]
    ZeroVector,

    #[error("antenna index {index} out of range for {len}-element array")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{name} must lie in {range}, got {value}")]
    OutOfDomain {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("DMC total power undefined: (K+1)*eta = {0} >= 1")]
    UndefinedDmcPower(f64),

    #[error("cannot normalize: total power is zero")]
    ZeroPower,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("lag {lag} s exceeds the evaluable span")]
    LagOutOfSpan { lag: f64 },

    #[error("no evaluable candidate within the search budget")]
    NoEvaluableCandidate,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

fn join(errs: &[ValidationError]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
