//! Error type shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Everything that can go wrong while ranking, generating noise, or evaluating.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation precondition (bad n-gram order,
    /// out-of-range `max_n`, empty corpus, and so on).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The CIDEr metric was requested without an IDF table.
    #[error("the cider metric requires an idf table built from the question pool")]
    MissingIdf,

    /// An external encoder has no vector for the given question id.
    #[error("no embedding found for question id {id:?}")]
    MissingEmbedding { id: String },

    /// Two vectors (or a vector and an encoder) disagree on dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The main question produces an all-zero ranking signal, so every
    /// candidate would score 0 and no order exists.
    #[error("ranking is degenerate for main question {mq_id:?}: the encoded target carries no signal")]
    RankingDegenerate { mq_id: String },

    /// A noise level beyond what the ranked list supports was requested.
    #[error("noise level {level} out of range: this ranked list supports at most level {max_level}")]
    LevelOutOfRange { level: usize, max_level: usize },

    /// Two rankings cover different question id sets and cannot be correlated.
    #[error("rankings cover different id sets: {only_left:?} only in the first, {only_right:?} only in the second")]
    MismatchedIdSets {
        only_left: Vec<String>,
        only_right: Vec<String>,
    },

    /// A record set that must be non-empty was empty.
    #[error("no records to score")]
    EmptyRecords,

    /// Robustness is undefined when clean accuracy is zero.
    #[error("robustness is undefined: clean accuracy is 0")]
    UndefinedRobustness,

    /// The external model adapter misbehaved (bad exit, protocol violation).
    #[error("model adapter failed: {0}")]
    Adapter(String),

    /// A line of an input file failed to parse.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
