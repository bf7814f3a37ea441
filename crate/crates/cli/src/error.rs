use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {source_name} at line {line}, column {column}: {message}")]
    Parse { source_name: String, line: usize, column: usize, message: String },

    #[error("unknown configuration key: {0}")]
    UnknownKey(String),

    #[error("ambiguous key `{key}`: matches {candidates}")]
    AmbiguousKey { key: String, candidates: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown preset `{0}` (available: {1})")]
    UnknownPreset(String, String),

    #[error(transparent)]
    Model(#[from] spinlink::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Validation,
    Infeasible,
    Io,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Infeasible => 3,
            ErrorKind::Io => 4,
            ErrorKind::Numerical => 5,
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            CliError::Parse { .. }
            | CliError::UnknownKey(_)
            | CliError::AmbiguousKey { .. }
            | CliError::Config(_)
            | CliError::UnknownPreset(..) => ErrorKind::Validation,
            CliError::Model(e) if e.is_validation() => ErrorKind::Validation,
            CliError::Model(e) if e.is_infeasible() => ErrorKind::Infeasible,
            CliError::Model(_) => ErrorKind::Numerical,
            CliError::Io { .. } | CliError::Csv(_) => ErrorKind::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }

    /// Machine-readable record written to stderr on failure.
    pub fn record(&self) -> serde_json::Value {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
