//! Error classification for the command-line tools.
//!
//! Every failure is either a validation problem (bad config, bad
//! parameters — exit code 2) or a solver failure (instability, singular
//! systems, non-convergence — exit code 3).

use thiserror::Error;
use twotone_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected before any computation: malformed config, invalid keys or
    /// parameter values, impossible requests. Exit code 2.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed: unstable model, singular system,
    /// non-convergent harmonic expansion. Exit code 3.
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        CliError::Solver(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::CouplingOrder { .. }
            | CoreError::Unmatchable { .. }
            | CoreError::SchemeMismatch { .. } => CliError::Validation(e.to_string()),
            CoreError::NotStable { .. }
            | CoreError::SingularAtFrequency { .. }
            | CoreError::NonConvergence { .. }
            | CoreError::Numerical { .. } => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io error: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
