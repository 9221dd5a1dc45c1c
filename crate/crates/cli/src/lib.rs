//! Library side of the `timelens` command: config parsing, the four
//! commands and SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] config::ConfigError),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Engine { context: String, source: timelens::Error },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 0 success, 1 validation failure, 2 config error, 3 runtime error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Engine { .. } | CliError::Io { .. } => 3,
        }
    }
}

pub(crate) trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Context<T> for timelens::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Engine { context: what.into(), source })
    }
}
