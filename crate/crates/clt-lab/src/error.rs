//! Error type for the lab binary, with the process exit-code mapping.

use std::path::PathBuf;

/// Anything that can stop a command.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Core(#[from] clt_lab_core::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    /// A certified bound was observed below a quantity it must dominate.
    /// These exit with a distinct code so harnesses can tell "input was
    /// bad" from "an inequality failed".
    #[error("soundness violation: {0}")]
    Soundness(String),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    /// Process exit code: 3 for soundness violations, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Soundness(_) => 3,
            _ => 2,
        }
    }

    /// Machine-readable form for standard error.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Core(_) => "core",
            LabError::Io { .. } => "io",
            LabError::Parse(_) => "parse",
            LabError::Invalid(_) => "invalid",
            LabError::Soundness(_) => "soundness",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
