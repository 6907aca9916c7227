use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("experience cites unknown paper `{paper_id}` (line {line})")]
    UnknownPaper { paper_id: String, line: usize },

    #[error("duplicate paper `{0}`")]
    DuplicatePaper(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("value {value} out of range for `{field}` (expected {expected})")]
    Range {
        field: String,
        value: String,
        expected: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("every configuration in generation {0} failed to evaluate")]
    AllFailed(usize),

    #[error("time budget exhausted before any evaluation")]
    BudgetExhausted,

    #[error("algorithm `{algorithm}` cannot process dataset `{dataset}`: {reason}")]
    Capability {
        algorithm: String,
        dataset: String,
        reason: String,
    },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("insufficient knowledge: {0}")]
    Knowledge(String),

    #[error("objective failed: {0}")]
    Objective(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn range(field: impl Into<String>, value: impl ToString, expected: impl Into<String>) -> Self {
        Error::Range {
            field: field.into(),
            value: value.to_string(),
            expected: expected.into(),
        }
    }

    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by malformed user input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::UnknownPaper { .. }
            | Error::DuplicatePaper(_)
            | Error::Invariant(_)
            | Error::Dataset(_)
            | Error::Range { .. }
            | Error::Json(_)
            | Error::UnknownAlgorithm(_) => true,
            Error::Stage { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
