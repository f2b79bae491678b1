use std::path::PathBuf;

use thiserror::Error;

/// Everything a run can fail with, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 2: the config or an input file is invalid.
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    /// Exit 3: a numerical stage failed.
    #[error("{operation} failed: {source}")]
    Numerical {
        operation: &'static str,
        #[source]
        source: tubeq_core::Error,
    },
    /// Exit 1: reading or writing a file.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Exit 1: the invariant suite reported failures.
    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::VerifyFailed { .. } => 1,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Tags a core error with the operation that produced it.
pub(crate) trait Stage<T> {
    fn stage(self, operation: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for tubeq_core::Result<T> {
    fn stage(self, operation: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { operation, source })
    }
}
