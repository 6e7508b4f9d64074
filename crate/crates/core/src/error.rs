use std::path::PathBuf;

/// Errors raised across the simulator, mitigation, training and harness layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is outside its allowed range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Caller broke an operation's precondition (dimension or index mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("mitigation failed: {0}")]
    Mitigation(String),

    /// Every entry of a quasi-distribution was clamped away.
    #[error("degenerate distribution: no positive mass after clamping")]
    DegenerateDistribution,

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
