use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("malformed {what} file {path}: {reason}")]
    MalformedFile {
        what: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("no hashtags found in corpus")]
    NoHashtags,

    #[error("empty network has no root")]
    EmptyNetwork,

    #[error("no users qualify for regression targets (min_tweets = {min_tweets})")]
    NoQualifyingUsers { min_tweets: usize },

    #[error("feature matrix and target are misaligned: {reason}")]
    MisalignedInputs { reason: String },

    #[error("regression needs at least 2 samples, got {got}")]
    TooFewSamples { got: usize },

    #[error("model comparison needs {needed}, got {got}")]
    IncomparableFits { needed: String, got: String },

    #[error("degrees of freedom must be positive: n = {samples}, parameters = {parameters}")]
    NonPositiveDof { samples: usize, parameters: usize },

    #[error("cohort analysis needs at least {needed} scored users, got {got}")]
    TooFewUsers { needed: usize, got: usize },

    #[error("invalid generator config: {reason}")]
    InvalidConfig { reason: String },

    #[error("content hash mismatch for {path}: expected {expected}, found {found}")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
