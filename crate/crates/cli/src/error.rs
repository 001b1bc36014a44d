use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("invalid input table: {0}")]
    Table(compfdr::Error),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Run(#[from] compfdr::Error),
}

/// Machine-readable error line written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Read { .. } | Self::Malformed { .. } | Self::MissingColumn(_) | Self::Table(_) => "input",
            Self::Config(_) | Self::Run(_) => "config",
            Self::Write { .. } => "output",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "input" => 2,
            "config" => 3,
            _ => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
