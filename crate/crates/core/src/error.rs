use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter state: {0}")]
    InvalidParameter(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid MCMC configuration: {0}")]
    InvalidConfig(String),

    #[error("log density term `{term}` is not finite")]
    NonFinite { term: String },

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("need at least {min} draws, got {len}")]
    TooShort { len: usize, min: usize },

    #[error("zero-variance input: autocorrelation undefined")]
    ZeroVariance,

    #[error("sampler initialization failed: log density term `{term}` is not finite")]
    Initialization { term: String },

    #[error("sampler invariant violated at iteration {iteration}: {what}")]
    InvariantViolation { iteration: usize, what: String },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid calendar data: {0}")]
    Calendar(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for failures caused by input files or calendar data.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDataset(_)
                | Error::Parse { .. }
                | Error::Calendar(_)
                | Error::Io { .. }
                | Error::Csv { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
