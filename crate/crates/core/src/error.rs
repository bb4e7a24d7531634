use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by index construction, persistence, traversal and
/// evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quantization channel max must be positive, got {0}")]
    InvalidChannelMax(f64),

    #[error("score must be finite and non-negative, got {0}")]
    InvalidScore(f64),

    #[error("bm25 input invalid: {0}")]
    Bm25Input(String),

    #[error("channel max undefined: empty score stream")]
    EmptyScoreStream,

    #[error("collection is empty")]
    EmptyCollection,

    #[error("duplicate document id {0:?} in collection")]
    DuplicateDocId(String),

    #[error("learned impacts reference unknown document ids: {0:?}")]
    UnknownDocIds(Vec<String>),

    #[error("negative learned weight {weight} for term {term:?} in document {docid:?}")]
    NegativeWeight {
        docid: String,
        term: String,
        weight: f64,
    },

    #[error("non-finite learned weight for term {term:?} in document {docid:?}")]
    NonFiniteWeight { docid: String, term: String },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("index load failed: {file}: {reason}")]
    Load { file: String, reason: String },

    #[error("empty latency sample set")]
    EmptyLatencySamples,

    #[error("synthetic corpus config invalid: {0}")]
    SynthConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn load(file: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Load {
            file: file.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
