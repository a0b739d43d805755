use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("series ranges differ: {0}")]
    RangeMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
