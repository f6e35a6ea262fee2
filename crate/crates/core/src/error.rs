use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the estimators, simulators and the study harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no exceedances of level {level} (N = 0)")]
    NoExceedances { level: f64 },

    #[error("insufficient exceedances: need at least {needed}, found {found}")]
    InsufficientExceedances { needed: usize, found: usize },

    #[error("insufficient data: need at least {needed} values, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("degenerate interexceedance times (zero denominator)")]
    DegenerateTimes,

    #[error("numeric degeneracy: {0}")]
    Degenerate(String),

    #[error("window too short: r = {r} < k = {k}")]
    Window { r: usize, k: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 configuration, 3 data, 4 numeric degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Window { .. } => 2,
            Error::Data { .. } | Error::Io { .. } | Error::InsufficientData { .. } => 3,
            Error::NoExceedances { .. }
            | Error::InsufficientExceedances { .. }
            | Error::DegenerateTimes
            | Error::Degenerate(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
