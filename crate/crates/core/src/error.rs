use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// A series with zero variance, for which correlation is undefined.
    #[error("degenerate (zero-variance) series at {location}")]
    DegenerateSeries { location: String },

    #[error("unsupported schema version: {0}")]
    Version(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("covariance error: {0}")]
    Covariance(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn degenerate(location: impl Into<String>) -> Self {
        Error::DegenerateSeries {
            location: location.into(),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
