use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no attachment targets")]
    NoAttachmentTargets,

    #[error("no paths: graph has no edges")]
    NoPaths,

    #[error("insufficient support: {0}")]
    InsufficientSupport(String),

    #[error("empty histogram")]
    EmptyHistogram,

    #[error("node {node} is not in the graph ({node_count} nodes)")]
    UnknownNode { node: usize, node_count: usize },

    #[error("horizon mismatch: {left} vs {right} steps")]
    HorizonMismatch { left: usize, right: usize },

    /// Malformed input text. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {cause}")]
    Io { path: PathBuf, cause: std::io::Error },

    #[error("{path}: {cause}")]
    Csv { path: PathBuf, cause: csv::Error },

    #[error("document error: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            cause: source,
        }
    }

    /// True for errors caused by caller-supplied parameters rather than data or I/O.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
