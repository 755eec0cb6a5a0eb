use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("vocabulary mismatch: header declares W={expected} but vocab file has {found} lines")]
    VocabMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("accounting error: {0}")]
    Accounting(String),

    #[error("protocol violation at iteration {iteration}, worker {worker}: {message}")]
    Protocol {
        iteration: u32,
        worker: u32,
        message: String,
    },

    #[error("worker {worker} failed at mini-batch {minibatch}, iteration {iteration}: {message}")]
    WorkerFailed {
        worker: u32,
        minibatch: usize,
        iteration: u32,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::VocabMismatch { .. }
            | Error::DimensionMismatch { .. }
            | Error::Serde(_) => ErrorKind::Config,
            Error::Io { .. } | Error::Csv(_) => ErrorKind::Io,
            Error::Domain(_)
            | Error::Accounting(_)
            | Error::Protocol { .. }
            | Error::WorkerFailed { .. } => ErrorKind::Numerical,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
