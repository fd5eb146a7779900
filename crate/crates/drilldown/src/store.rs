//! Content-addressed on-disk store for collections, corpora and models.
//!
//! ```text
//! <root>/
//!   pipeline.json
//!   collections/<collection_id>.json
//!   corpora/<corpus_id>.json
//!   models/<model_id>.ldam
//!   .lock               present while a mutation is in progress
//! ```

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use drilldown_core::codec;
use drilldown_core::{Corpus, LdaModel};

use crate::error::{Error, Result};
use crate::formats::{self, CollectionFile};
use crate::pipeline::PipelineState;

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Exclusive mutation lock; released on drop.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

impl Store {
    /// Opens `root`, creating the directory layout when missing.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for sub in ["collections", "corpora", "models"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn lock(&self) -> Result<StoreLock> {
        let path = self.root.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(StoreLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Busy),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    fn collection_path(&self, id: &str) -> PathBuf {
        self.root.join("collections").join(format!("{id}.json"))
    }

    fn corpus_path(&self, id: &str) -> PathBuf {
        self.root.join("corpora").join(format!("{id}.json"))
    }

    fn model_path(&self, id: &str) -> PathBuf {
        self.root.join("models").join(format!("{id}.ldam"))
    }

    pub fn pipeline_path(&self) -> PathBuf {
        self.root.join("pipeline.json")
    }

    pub fn put_collection(&self, file: &CollectionFile) -> Result<()> {
        formats::write_json(&self.collection_path(&file.collection_id), file)
    }

    pub fn load_collection(&self, id: &str) -> Result<CollectionFile> {
        let path = self.collection_path(id);
        if !path.exists() {
            return Err(Error::NotFound {
                kind: "collection",
                id: id.to_owned(),
            });
        }
        let file: CollectionFile = formats::read_json(&path)?;
        if file.format_version != formats::COLLECTION_FORMAT_VERSION {
            return Err(Error::UnsupportedFormat {
                what: "collection",
                version: file.format_version,
            });
        }
        Ok(file)
    }

    pub fn corpus_bytes(&self, id: &str) -> Result<Vec<u8>> {
        let path = self.corpus_path(id);
        fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound {
                kind: "corpus",
                id: id.to_owned(),
            },
            _ => Error::io(&path, e),
        })
    }

    pub fn put_corpus(&self, corpus: &Corpus) -> Result<String> {
        formats::write_atomic(
            &self.corpus_path(&corpus.corpus_id),
            &formats::corpus_to_json(corpus),
        )?;
        Ok(corpus.corpus_id.clone())
    }

    pub fn load_corpus(&self, id: &str) -> Result<Corpus> {
        let bytes = self.corpus_bytes(id)?;
        formats::corpus_from_json(&bytes, &self.corpus_path(id))
    }

    pub fn has_corpus(&self, id: &str) -> bool {
        self.corpus_path(id).exists()
    }

    pub fn model_bytes(&self, id: &str) -> Result<Vec<u8>> {
        let path = self.model_path(id);
        fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound {
                kind: "model",
                id: id.to_owned(),
            },
            _ => Error::io(&path, e),
        })
    }

    /// Saves the model and returns its content id.
    pub fn put_model(&self, model: &LdaModel) -> Result<String> {
        let bytes = codec::save(model);
        let id = codec::model_id(&bytes);
        formats::write_atomic(&self.model_path(&id), &bytes)?;
        Ok(id)
    }

    pub fn load_model(&self, id: &str) -> Result<LdaModel> {
        Ok(codec::load(&self.model_bytes(id)?)?)
    }

    pub fn has_model(&self, id: &str) -> bool {
        self.model_path(id).exists()
    }

    pub fn load_pipeline(&self) -> Result<PipelineState> {
        let path = self.pipeline_path();
        if !path.exists() {
            return Ok(PipelineState::default());
        }
        let state: PipelineState = formats::read_json(&path)?;
        if state.format_version != crate::pipeline::PIPELINE_FORMAT_VERSION {
            return Err(Error::UnsupportedFormat {
                what: "pipeline",
                version: state.format_version,
            });
        }
        Ok(state)
    }

    pub fn save_pipeline(&self, state: &PipelineState) -> Result<()> {
        formats::write_json(&self.pipeline_path(), state)
    }
}
