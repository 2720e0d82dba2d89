use std::process::ExitCode;

use thiserror::Error;

/// Failure of a command, classified by the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(#[source] sv_calendar::Error),

    #[error("sampler error: {0}")]
    Sampler(#[source] sv_calendar::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Sampler(_) => 4,
        })
    }

    /// Errors while reading or validating inputs.
    pub fn data(e: sv_calendar::Error) -> Self {
        match e {
            sv_calendar::Error::InvalidConfig(m) | sv_calendar::Error::InvalidPrior(m) => CliError::Config(m),
            other => CliError::Data(other),
        }
    }

    /// Errors raised while running or summarizing a chain.
    pub fn sampler(e: sv_calendar::Error) -> Self {
        match e {
            sv_calendar::Error::InvalidConfig(m) | sv_calendar::Error::InvalidPrior(m) => CliError::Config(m),
            e if e.is_data_error() => CliError::Data(e),
            other => CliError::Sampler(other),
        }
    }
}
