use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside its valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input sequence violates a sortedness precondition.
    #[error("unsorted input: {what} at index {index}")]
    Unsorted { what: String, index: usize },

    /// Malformed TTAG1 data.
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Too few events for an estimator to be defined.
    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    /// Numerical procedure failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A simulation request would exceed the configured memory cap.
    #[error("capacity exceeded: expected {expected} events, cap is {cap}; generate in smaller time chunks")]
    Capacity { expected: u64, cap: u64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn stats(msg: impl Into<String>) -> Self {
        Error::InsufficientStatistics(msg.into())
    }
}
