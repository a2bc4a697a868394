use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration key that does not exist.
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    /// A known key with a value that fails validation.
    #[error("invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    /// Caller broke an operation's precondition, e.g. mismatched grid shapes.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("policy chose action {action} in state {state}, env has {action_count} actions")]
    InvalidAction {
        state: usize,
        action: usize,
        action_count: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed input whose contents disagree with each other.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
