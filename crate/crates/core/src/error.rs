use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window alignment: {0}")]
    WindowAlignment(String),

    #[error("measurement unavailable: {0}")]
    MeasurementUnavailable(String),

    #[error("configuration: {0}")]
    Configuration(String),

    #[error("numerical: {0}")]
    Numerical(String),

    #[error("simulation failed in interval [{t0:.4}, {t1:.4}) s: {reason}")]
    Simulation { t0: f64, t1: f64, reason: String },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
