//! Instance files, verification suites and the `secord` command surface.

pub mod app;
pub mod format;
pub mod report;
pub mod suites;

use std::path::PathBuf;

use secord_core::{EnforceError, NetworkError};
use secord_oracle::OracleError;

pub use format::{parse, serialize, FormatError, Instance, InstanceDocument, FORMAT_VERSION};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VIOLATION: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const FILE: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Resource(_) => exit::RESOURCE,
            CliError::Io { .. } | CliError::Format { .. } => exit::FILE,
            CliError::Violation(_) => exit::VIOLATION,
        }
    }
}

impl From<EnforceError> for CliError {
    fn from(e: EnforceError) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } | OracleError::WalkCap | OracleError::SweepBudget => {
                CliError::Resource(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::Usage(e.to_string())
    }
}
