use std::path::PathBuf;
use std::process::ExitCode;

use macsim::analytic::AnalyticError;
use macsim::sim::SimError;
use macsim::{ParamError, SweepError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown technique '{0}' (expected one of pure-aloha, slotted-aloha, csma-ca, tdma, fdma)")]
    UnknownTechnique(String),
    #[error("invalid sweep: {0}")]
    Sweep(#[from] SweepError),
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Input { path: path.into(), message: message.into() }
    }

    /// Process exit code. 1 is reserved for failed comparison checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::UnknownTechnique(_) => 3,
            CliError::Sweep(_) => 4,
            CliError::Config { .. } | CliError::Param(_) | CliError::Sim(SimError::Config(_) | SimError::Param(_)) => 5,
            CliError::Analytic(AnalyticError::Param(_)) => 5,
            CliError::Io { .. } => 6,
            CliError::Input { .. } => 7,
            CliError::Sim(_) | CliError::Analytic(_) => 70,
        }
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
