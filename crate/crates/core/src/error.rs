use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    /// An invariant was violated; `field` is the path to the offending value.
    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("stream order: t={got} does not follow t={previous}")]
    StreamOrder { previous: u64, got: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("numerics error: {0}")]
    Numerics(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("protocol error at byte {offset}: {message}")]
    Protocol { offset: usize, message: String },

    #[error("synth error: {0}")]
    Synth(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn protocol(offset: usize, message: impl Into<String>) -> Self {
        Error::Protocol {
            offset,
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
