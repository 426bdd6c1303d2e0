use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution parameter is outside its domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// A sampler, model or experiment was configured inconsistently.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Inputs to a metric or estimator failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A sampler invariant was violated (typically a caller bug).
    #[error("sampler invariant violated: {0}")]
    Invariant(String),

    /// A distance conditioned on an empty class.
    #[error("distance undefined: {0}")]
    UndefinedDistance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
