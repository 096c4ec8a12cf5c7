use std::path::PathBuf;

use potwell_core::Error as CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for invalid configuration or model, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Core { source, .. } => match source {
                CoreError::InvalidOperator(_)
                | CoreError::InvalidModel(_)
                | CoreError::InvalidParameter(_)
                | CoreError::GammaOutOfRange { .. }
                | CoreError::NotMeanFree { .. } => 2,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Runtime(_) => 1,
        }
    }
}

pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn context(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: what.into(),
            source,
        })
    }
}

impl<T> Context<T> for std::io::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T> {
        self.map_err(|source| CliError::Io {
            context: what.into(),
            source,
        })
    }
}
