use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    ShapeValidation(String),

    #[error("insufficient level-set padding: {0}")]
    InsufficientPadding(String),

    #[error("query outside level-set domain at {0:?}")]
    OutOfDomain(Vec<f64>),

    #[error("undefined normal (degenerate gradient) at {0:?}")]
    UndefinedNormal(Vec<f64>),

    #[error("level-set domain too small for confinement band: {0}")]
    BandOverflow(String),

    #[error("region unresolved at this spacing (no lattice site has phi < 0)")]
    RegionUnresolved,

    #[error("geometry fields inconsistent - rebuild with Boolean subtraction: {0}")]
    FieldsInconsistent(String),

    #[error("unknown body id {0}")]
    UnknownBody(usize),

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format { path: path.into(), msg: msg.into() }
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config { line, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
