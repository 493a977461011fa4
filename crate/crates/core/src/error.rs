use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid metric parameters: {0}")]
    InvalidMetric(String),

    #[error("value {value} outside axis range [{lower}, {upper}]")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("unsupported boundary rule on face {0}")]
    UnsupportedFace(&'static str),

    #[error("zero pivot at row {row} of a tridiagonal solve")]
    SingularPivot { row: usize },

    #[error("solution diverged at step {step}: max|U| = {max_abs}")]
    Divergence { step: usize, max_abs: f64 },

    #[error("non-finite value in solution at step {step}")]
    NonFinite { step: usize },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
