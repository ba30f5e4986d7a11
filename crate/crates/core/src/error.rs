use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("relative entropy is infinite")]
    InfiniteDivergence,

    #[error("no convergence after {iterations} iterations (certified gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("input ({x}, {y}) violates the promise")]
    PromiseViolation { x: u128, y: u128 },

    #[error("input out of range: {0}")]
    InputOutOfRange(String),

    #[error("space too large to enumerate: {0}")]
    NotEnumerable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
