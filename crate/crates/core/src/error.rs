use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("unknown class label {label} (manifest declares {declared} classes)")]
    UnknownClass { label: i64, declared: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel {0} is not present in the matrix")]
    UnknownChannel(usize),

    #[error("channel {0} is listed more than once")]
    DuplicateChannel(usize),

    #[error("class {label} cannot be split: {reason}")]
    DegenerateSplit { label: i64, reason: String },

    #[error("degenerate class counts: {0}")]
    DegenerateClasses(String),

    #[error("pooled covariance is singular even after ridge regularization")]
    SingularCovariance,

    #[error("test channels {test:?} do not match training channels {train:?}")]
    ChannelMismatch { train: Vec<usize>, test: Vec<usize> },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("every relief probe was skipped (no near-hit available)")]
    AllProbesSkipped,

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("prefix n={n}: {source}")]
    Prefix {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("all {0} experiment combinations failed")]
    AllCombinationsFailed(usize),
}

impl Error {
    pub(crate) fn in_trial(self, trial: usize) -> Error {
        Error::Trial {
            trial,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_prefix(self, n: usize) -> Error {
        Error::Prefix {
            n,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad user input rather than a failed pipeline run.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
