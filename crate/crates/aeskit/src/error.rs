use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failure category; fixes the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Validation,
    Io,
    Numeric,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Validation => 3,
            Category::Io => 4,
            Category::Numeric => 5,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{context}: {source}")]
    Core { context: String, source: aeskit_core::Error },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn category(&self) -> Category {
        match self {
            CliError::Usage(_) => Category::Usage,
            CliError::Io { .. } => Category::Io,
            CliError::Core { source, .. } if source.is_numeric() => Category::Numeric,
            CliError::Core { .. } | CliError::Format { .. } | CliError::Validation(_) => Category::Validation,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        CliError::Format { path: path.to_path_buf(), message: message.into() }
    }
}

impl From<aeskit_core::Error> for CliError {
    fn from(source: aeskit_core::Error) -> Self {
        CliError::Core { context: "error".into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attach a context label to core errors.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T>;
}

impl<T> Context<T> for aeskit_core::Result<T> {
    fn context(self, what: impl Into<String>) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what.into(), source })
    }
}
