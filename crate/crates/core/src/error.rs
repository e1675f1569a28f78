use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The model does not satisfy the preconditions of the operation.
    #[error("model error: {0}")]
    Model(String),
    #[error("fit error: {0}")]
    Fit(String),
    /// Tabulated input could not be parsed. `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("best-response dynamics did not converge after {rounds} rounds (last change {residual:e})")]
    NonConvergence { rounds: usize, residual: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
