use std::fmt;

use dissim_core::Error as CoreError;

/// Failure of a run, carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Budget(_) => 3,
            RunError::Numerical(_) | RunError::Io(_) => 4,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        RunError::Config(msg.to_string())
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Singular { .. } | CoreError::Numerical(_) => RunError::Numerical(e.to_string()),
            CoreError::Unsupported(_) => RunError::Budget(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Numerical(format!("csv: {e}"))
    }
}

pub type RunResult<T> = Result<T, RunError>;
