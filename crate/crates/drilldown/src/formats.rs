//! Versioned JSON containers for corpora and cleaned collections.

use std::fs;
use std::path::Path;

use drilldown_core::fingerprint::fnv64;
use drilldown_core::{Corpus, Volume};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CORPUS_FORMAT_VERSION: u64 = 1;
pub const COLLECTION_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub format_version: u64,
    pub corpus: Corpus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionFile {
    pub format_version: u64,
    pub collection_id: String,
    /// Directory the volumes were read from.
    pub source: String,
    /// Volumes after header stripping and hyphenation repair.
    pub volumes: Vec<Volume>,
}

impl CollectionFile {
    pub fn new(source: String, volumes: Vec<Volume>) -> Self {
        let body = serde_json::to_vec(&volumes).unwrap_or_default();
        Self {
            format_version: COLLECTION_FORMAT_VERSION,
            collection_id: format!("h{:016x}", fnv64(&body)),
            source,
            volumes,
        }
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u64,
}

pub fn corpus_to_json(corpus: &Corpus) -> Vec<u8> {
    let file = CorpusFile {
        format_version: CORPUS_FORMAT_VERSION,
        corpus: corpus.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("corpus serializes");
    out.push(b'\n');
    out
}

pub fn corpus_from_json(bytes: &[u8], origin: &Path) -> Result<Corpus> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(|e| Error::json(origin, e))?;
    if probe.format_version != CORPUS_FORMAT_VERSION {
        return Err(Error::UnsupportedFormat {
            what: "corpus",
            version: probe.format_version,
        });
    }
    let file: CorpusFile = serde_json::from_slice(bytes).map_err(|e| Error::json(origin, e))?;
    file.corpus
        .validate()
        .map_err(|e| Error::Collection(format!("{}: {e}", origin.display())))?;
    Ok(file.corpus)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
