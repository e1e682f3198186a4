use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid code configuration: {0}")]
    InvalidCode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("joint distribution is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("decoder spec does not match the code: {0}")]
    SpecMismatch(String),

    #[error("malformed decoder spec: {0}")]
    SpecFormat(String),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
