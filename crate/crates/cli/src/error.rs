use eitforce::Error;

use crate::config::ConfigError;

/// Exit code for malformed configuration or out-of-domain parameters.
pub const EXIT_CONFIG: i32 = 1;
/// Exit code when `verify` ran and a check failed.
pub const EXIT_VERIFY_FAILED: i32 = 2;
/// Exit code for numerical failures during evaluation.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Model(Error::InvalidParameter { .. } | Error::InvalidRegime(_)) => EXIT_CONFIG,
            CliError::Model(_) | CliError::Csv(_) => EXIT_NUMERICAL,
        }
    }
}
