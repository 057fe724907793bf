//! File formats and commands behind the `psihat` binary.

pub mod commands;
pub mod document;

use std::fmt;

/// Exit code for a failed verification.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for unusable input.
pub const EXIT_INPUT: i32 = 2;

/// An error carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILURE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<psihat::Error> for CliError {
    fn from(e: psihat::Error) -> Self {
        Self::input(e.to_string())
    }
}
