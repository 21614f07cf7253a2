use std::path::PathBuf;

use chrono::{DateTime, Utc};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value violated a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A malformed row in a delimited input.
    #[error("line {line}, column {column}: {message}")]
    Parse { line: u64, column: String, message: String },

    #[error("power integration: {0}")]
    Integration(String),

    #[error("intensity series does not cover {from} .. {to}")]
    Uncovered { from: DateTime<Utc>, to: DateTime<Utc> },

    #[error("unknown scenario {name:?}; registered: {registered}")]
    UnknownScenario { name: String, registered: String },

    #[error("intensity endpoint returned HTTP {status} for {url}")]
    HttpStatus { status: u16, url: String },

    #[error("transport failure after {attempts} attempt(s) for {url}: {message}")]
    Transport {
        url: String,
        attempts: u32,
        message: String,
    },

    #[error("malformed intensity payload ({message}); excerpt: {excerpt}")]
    Payload { message: String, excerpt: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the network rather than by inputs.
    pub fn is_network(&self) -> bool {
        matches!(self, Error::HttpStatus { .. } | Error::Transport { .. })
    }

    /// Attaches a file path to an error raised while reading that file.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Io { .. } | Error::File { .. } => self,
            other => Error::File {
                path: path.into(),
                message: other.to_string(),
            },
        }
    }
}
