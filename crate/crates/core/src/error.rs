//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input that could not be decoded at all.
    #[error("parse error: {0}")]
    Parse(String),
    /// Decoded input that violates a model invariant.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    /// Bad solver or generator configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A benchmark instance cannot be produced from the requested settings.
    #[error("generation error: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
