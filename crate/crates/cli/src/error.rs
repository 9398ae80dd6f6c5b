use std::path::PathBuf;

use chargedrop::Error;
use thiserror::Error;

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_PHASE: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;
pub const EXIT_VERIFICATION: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("minimizer stopped after {iterations} iterations with gradient norm {grad_norm:e}; points written but flagged")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::InvalidParams(_) | Error::Domain(_) => EXIT_INVALID,
                Error::Phase(_)
                | Error::PhaseMismatch(_)
                | Error::ContainmentViolated
                | Error::NoValidRoot(_) => EXIT_PHASE,
                Error::InequalityViolated { .. } => EXIT_VERIFICATION,
                _ => EXIT_INTERNAL,
            },
            CliError::Usage(_) => EXIT_INVALID,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_INTERNAL,
            CliError::NotConverged { .. } => EXIT_NOT_CONVERGED,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}
