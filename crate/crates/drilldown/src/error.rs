use std::path::PathBuf;

use drilldown_core::codec::CodecError;
use drilldown_core::scimap::ScimapError;
use drilldown_core::{CorpusError, DrillError, LdaError, RetrievalError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Collection(String),
    #[error("unsupported {what} format version {version}")]
    UnsupportedFormat { what: &'static str, version: u64 },
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("store is locked by another mutation")]
    Busy,
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("no document within distance {threshold} of the query topics (closest is {closest})")]
    NothingRetained { threshold: f64, closest: f64 },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Drill(#[from] DrillError),
    #[error(transparent)]
    Lda(#[from] LdaError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Scimap(#[from] ScimapError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Self::Json {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable name, e.g. `UnknownTopic`.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Io { .. } => "IoError",
            Self::Json { .. } => "InvalidJson",
            Self::Collection(_) => "InvalidCollection",
            Self::UnsupportedFormat { .. } => "UnsupportedVersion",
            Self::NotFound { .. } => "NotFound",
            Self::Busy => "Busy",
            Self::Invalid(_) => "InvalidRequest",
            Self::NothingRetained { .. } => "NothingRetained",
            Self::Corpus(e) => match e {
                CorpusError::NoVolumes => "NoVolumes",
                CorpusError::DuplicateVolumeId(_) => "DuplicateVolumeId",
                CorpusError::AllDocumentsEmpty => "AllDocumentsEmpty",
            },
            Self::Drill(e) => match e {
                DrillError::UnknownDocId(_) => "UnknownDocId",
                DrillError::NotFiner { .. } => "NotFiner",
                DrillError::MissingVolume(_) => "MissingVolume",
                DrillError::Corpus(_) => "AllDocumentsEmpty",
            },
            Self::Lda(e) => match e {
                LdaError::EmptyCorpus => "EmptyCorpus",
                LdaError::InvalidParams(_) => "InvalidParams",
                LdaError::ModelCorpusMismatch => "ModelCorpusMismatch",
            },
            Self::Codec(e) => match e {
                CodecError::UnsupportedVersion(_) => "UnsupportedVersion",
                CodecError::CorruptModel(_) => "CorruptModel",
            },
            Self::Retrieval(e) => match e {
                RetrievalError::NoQueryWordInVocabulary => "NoQueryWordInVocabulary",
                RetrievalError::UnknownTopic(_) => "UnknownTopic",
                RetrievalError::UnknownDocument(_) => "UnknownDocument",
                RetrievalError::NoTopics => "NoTopics",
                RetrievalError::DuplicateTopic(_) => "DuplicateTopic",
                RetrievalError::WrongGranularity { .. } => "WrongGranularity",
                RetrievalError::EmptyAfterFiltering => "EmptyAfterFiltering",
            },
            Self::Scimap(e) => match e {
                ScimapError::UnparseableCallNumber(_) => "UnparseableCallNumber",
                ScimapError::EmptyBasemap => "EmptyBasemap",
                ScimapError::UnknownSubdiscipline { .. } => "UnknownSubdiscipline",
            },
        }
    }

    /// HTTP status class for the error.
    pub fn status(&self) -> u16 {
        match self {
            Self::NotFound { .. } => 404,
            Self::Busy => 409,
            Self::Retrieval(RetrievalError::UnknownDocument(_)) => 404,
            Self::Io { .. } => 500,
            _ => 422,
        }
    }
}
