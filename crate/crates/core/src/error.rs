use std::path::PathBuf;

/// Errors produced by the library.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    /// A malformed or unsupported image stream.
    #[error("decode error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    /// An argument violated an operation's contract.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Embedded filter constants failed their self-check.
    #[error("internal consistency: {0}")]
    Consistency(String),

    /// Configuration file or key problem.
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn decode(offset: usize, reason: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
