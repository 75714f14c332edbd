use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}: file contains no data lines")]
    EmptyFile(PathBuf),
    #[error("disease graph contains a cycle through '{0}'")]
    Cycle(String),
    #[error("disease graph has a self-loop on '{0}'")]
    SelfLoop(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid fold mask: {0}")]
    InvalidMask(String),
    #[error("requested {requested} negatives but only {available} candidate pairs exist")]
    NotEnoughNegatives { requested: usize, available: usize },
    #[error("need at least {needed} positives, found {found}")]
    TooFewPositives { needed: usize, found: usize },
    #[error("{0}: both classes must be present")]
    SingleClass(String),
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
    #[error("non-finite value in '{layer}' ({detail})")]
    NonFinite { layer: &'static str, detail: String },
    #[error("numerical check failed: {0}")]
    Tolerance(String),
    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {message}")]
    InvalidValue { key: String, message: String },
    #[error("unknown seed stage '{0}'")]
    UnknownStage(String),
    #[error("fold {fold} leaks held-out pairs: {detail}")]
    Leak { fold: usize, detail: String },
    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ConfigParse { .. }
            | Error::UnknownKey(_)
            | Error::InvalidValue { .. }
            | Error::UnknownStage(_) => ErrorClass::Usage,
            Error::NonFinite { .. } | Error::Tolerance(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
