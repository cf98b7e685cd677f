use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive enumeration requested beyond the supported size.
    #[error("size error: n = {n} exceeds the limit of {max}")]
    Size { n: usize, max: usize },

    /// Rejection sampling gave up.
    #[error("generation failed after {attempts} attempts; tightest violated constraint: {violated}")]
    Generation { attempts: usize, violated: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
