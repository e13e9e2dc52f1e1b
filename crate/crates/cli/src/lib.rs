//! Library half of the `qwass` command-line tool: instance files, reports,
//! subcommands and verification suites.

pub mod commands;
pub mod instance;
pub mod report;
pub mod verify;

use thiserror::Error;

/// Exit status for bad input: unreadable or malformed files and invalid
/// parameters.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for a computation that ran but failed: solver breakdown,
/// negative divergence radicand, failed verification.
pub const EXIT_FAILURE: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    pub(crate) fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub(crate) fn failure(e: impl std::fmt::Display) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
