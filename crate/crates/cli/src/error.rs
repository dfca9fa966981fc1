use thiserror::Error;

/// Failures of a CLI command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent run specification (exit code 2).
    #[error("spec error: {0}")]
    Spec(String),
    /// Unreadable or unwritable files (exit code 3).
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<causal_bounds::Error> for CliError {
    fn from(e: causal_bounds::Error) -> Self {
        match e {
            causal_bounds::Error::Io(m) => CliError::Io(m),
            other => CliError::Spec(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
