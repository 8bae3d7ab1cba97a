use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size h={h} is outside the admissible range {range} of method {method}")]
    OutOfRange {
        method: String,
        h: f64,
        range: String,
    },

    #[error("invalid method {method}: {reason}")]
    InvalidMethod { method: String, reason: String },

    /// 4det(A) - tr(A)^2 <= 0: the companion matrix has no complex eigenvalue pair.
    #[error("complex-pair condition failed: 4det(A) - tr(A)^2 = {0:e}")]
    ComplexPairFailed(f64),

    #[error("near-degenerate spectrum: |sin(theta)| = {0:e}")]
    NearDegenerateSpectrum(f64),

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown method selector '{0}'")]
    UnknownMethod(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
