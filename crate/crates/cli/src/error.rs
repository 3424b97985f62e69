use homlab_core::Error;

/// Failure of one command, carrying its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Stats(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Stats(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain(_) | Error::Capacity { .. } => CliError::Config(msg),
            Error::Io(_) | Error::Format { .. } | Error::Unsorted { .. } => CliError::Io(msg),
            Error::InsufficientStatistics(_) => CliError::Stats(msg),
            Error::Numeric(_) => CliError::Other(msg),
        }
    }
}
