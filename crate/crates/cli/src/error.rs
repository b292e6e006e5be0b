use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{} at byte {offset}: {what}", path.display())]
    Format {
        path: PathBuf,
        offset: u64,
        what: String,
    },

    #[error("{} line {line}: {what}", path.display())]
    Csv {
        path: PathBuf,
        line: u64,
        what: String,
    },

    #[error("{} does not parse: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid embedding: {0}")]
    Embedding(String),

    #[error("{0}")]
    Usage(String),

    #[error("ordering violated in {count} of {total} instances (min slack {min_slack:e})")]
    ChainViolation {
        count: usize,
        total: usize,
        min_slack: f64,
    },

    #[error(transparent)]
    Core(#[from] cfid::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 3 for numerical failures, 2 for everything the caller can fix.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::ChainViolation { .. } => 3,
            _ => 2,
        }
    }
}
