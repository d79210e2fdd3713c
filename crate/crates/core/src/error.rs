use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("non-finite numeric value {value:?} at row {row}, column {column}")]
    NonFinite {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column {0} not found")]
    MissingLabel(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column {index} ({name}) is continuous; discretize it or use a density estimator")]
    ContinuousColumn { index: usize, name: String },

    #[error("configuration count {count} exceeds cap {cap}")]
    CapExceeded { count: u128, cap: usize },

    #[error("class {class} has {count} samples; at least 2 are required for density estimation")]
    TooFewClassSamples { class: usize, count: usize },

    #[error("feature {0} is already selected")]
    AlreadySelected(usize),

    #[error("no candidate features remain")]
    NoCandidates,

    #[error("class {class} is absent from training fold {fold}; re-stratify or merge rare classes")]
    ClassAbsentFromFold { class: usize, fold: usize },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    /// Stable machine-readable code used by the CLI and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Parse { .. } => "E_PARSE",
            Error::NonFinite { .. } => "E_NON_FINITE",
            Error::MissingLabel(_) => "E_MISSING_LABEL",
            Error::InvalidDataset(_) => "E_DATASET",
            Error::InvalidArgument(_) => "E_ARGUMENT",
            Error::ContinuousColumn { .. } => "E_CONTINUOUS",
            Error::CapExceeded { .. } => "E_CAP",
            Error::TooFewClassSamples { .. } => "E_CLASS_SIZE",
            Error::AlreadySelected(_) => "E_SELECTED",
            Error::NoCandidates => "E_NO_CANDIDATES",
            Error::ClassAbsentFromFold { .. } => "E_FOLD",
            Error::VerificationFailed(_) => "E_VERIFY",
            Error::Unsupported(_) => "E_UNSUPPORTED",
            Error::Serialize(_) => "E_SERIALIZE",
        }
    }
}
