//! Pipeline log (`pipeline.json`) and the page-annotation export.
//!
//! `pipeline.json`, version 1:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "root_collection": "h0123456789abcdef",
//!   "stages": [
//!     {"stage": 0, "parent": null, "action": "ingest", "corpus_id": "c…",
//!      "model_id": null, "params": {…}, "timestamp": 1760000000}
//!   ]
//! }
//! ```
//!
//! Stages form a chain: stage `i` has parent `i − 1`. `params` is the exact
//! request that produced the stage, so the log can be replayed.
//! `timestamp` is seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
//!
//! Annotation export `manifest.json`, version 1, next to a `pages/` directory
//! holding one text file per ranked page:
//!
//! ```json
//! {"format_version": 1, "model_id": "m…", "query_topics": [3, 9],
//!  "pages": [{"rank": 1, "doc_id": "v00/p0003", "volume_id": "v00", "page_index": 3,
//!             "label": "…", "distance": 0.04, "file": "pages/v00_p0003.txt"}]}
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use drilldown_core::retrieval::DocRanking;
use drilldown_core::{Granularity, Volume};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats;
use crate::store::Store;

pub const PIPELINE_FORMAT_VERSION: u64 = 1;
pub const MANIFEST_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Ingest,
    Train,
    Filter,
    Drill,
    Export,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub parent: Option<usize>,
    pub action: Action,
    pub corpus_id: Option<String>,
    pub model_id: Option<String>,
    pub params: serde_json::Value,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub format_version: u64,
    pub root_collection: Option<String>,
    pub stages: Vec<StageRecord>,
}

impl Default for PipelineState {
    fn default() -> Self {
        Self {
            format_version: PIPELINE_FORMAT_VERSION,
            root_collection: None,
            stages: Vec::new(),
        }
    }
}

/// Seconds since the epoch; `SOURCE_DATE_EPOCH` overrides the clock so
/// logs can be reproduced byte for byte.
fn now() -> u64 {
    if let Some(fixed) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return fixed;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl PipelineState {
    pub fn record(
        &mut self,
        action: Action,
        corpus_id: Option<String>,
        model_id: Option<String>,
        params: serde_json::Value,
    ) -> &StageRecord {
        let stage = self.stages.len();
        self.stages.push(StageRecord {
            stage,
            parent: stage.checked_sub(1),
            action,
            corpus_id,
            model_id,
            params,
            timestamp: now(),
        });
        &self.stages[stage]
    }

    /// Checks the chain shape, that every referenced id exists in `store`,
    /// and that every corpus's provenance reaches the root collection.
    pub fn validate(&self, store: &Store) -> Result<()> {
        for (i, s) in self.stages.iter().enumerate() {
            if s.stage != i || s.parent != i.checked_sub(1) {
                return Err(Error::Invalid(format!("stage {i} breaks the chain")));
            }
            if let Some(c) = &s.corpus_id {
                if !store.has_corpus(c) {
                    return Err(Error::NotFound {
                        kind: "corpus",
                        id: c.clone(),
                    });
                }
            }
            if let Some(m) = &s.model_id {
                if !store.has_model(m) {
                    return Err(Error::NotFound {
                        kind: "model",
                        id: m.clone(),
                    });
                }
            }
        }
        if self.stages.is_empty() {
            return Ok(());
        }
        let root = self
            .root_collection
            .as_deref()
            .ok_or_else(|| Error::Invalid("pipeline has stages but no root collection".into()))?;
        let collection = store.load_collection(root)?;
        let known: BTreeSet<&str> = collection
            .volumes
            .iter()
            .map(|v| v.volume_id.as_str())
            .collect();
        for id in self.stages.iter().filter_map(|s| s.corpus_id.as_deref()) {
            let lineage = corpus_lineage(store, id)?;
            let top = store.load_corpus(lineage.last().map(String::as_str).unwrap_or(id))?;
            if top.parent_corpus_id.is_some() {
                return Err(Error::Invalid(format!(
                    "corpus {id} does not reach a root corpus"
                )));
            }
            let corpus = store.load_corpus(id)?;
            if let Some(d) = corpus
                .documents
                .iter()
                .find(|d| !known.contains(d.provenance.volume_id.as_str()))
            {
                return Err(Error::Invalid(format!(
                    "document {} has no source volume",
                    d.doc_id
                )));
            }
        }
        Ok(())
    }
}

/// `[id, parent, grandparent, …]` up to the corpus built at ingest.
pub fn corpus_lineage(store: &Store, id: &str) -> Result<Vec<String>> {
    let mut out = vec![id.to_owned()];
    let mut current = store.load_corpus(id)?;
    while let Some(parent) = current.parent_corpus_id.clone() {
        if out.contains(&parent) {
            return Err(Error::Invalid(format!(
                "corpus {parent} is its own ancestor"
            )));
        }
        current = store.load_corpus(&parent)?;
        out.push(parent);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub rank: usize,
    pub doc_id: String,
    pub volume_id: String,
    pub page_index: u32,
    pub label: String,
    pub distance: f64,
    /// Page text file, relative to the manifest.
    pub file: String,
}

/// Export manifest for argument-annotation tools, version 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationManifest {
    pub format_version: u64,
    pub model_id: String,
    pub query_topics: Vec<u32>,
    pub pages: Vec<ManifestEntry>,
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `manifest.json` plus one plain-text file per ranked page under
/// `out_dir/pages/`.
pub fn export_annotation_manifest(
    model_id: &str,
    ranking: &DocRanking,
    volumes: &[Volume],
    out_dir: &Path,
) -> Result<AnnotationManifest> {
    if ranking.granularity != Granularity::Page {
        return Err(drilldown_core::RetrievalError::WrongGranularity {
            expected: Granularity::Page,
            actual: ranking.granularity,
        }
        .into());
    }
    let mut pages = Vec::with_capacity(ranking.entries.len());
    for (i, e) in ranking.entries.iter().enumerate() {
        let page_index = e
            .page_index
            .ok_or_else(|| Error::Invalid(format!("{} has no page index", e.doc_id)))?;
        let page = volumes
            .iter()
            .find(|v| v.volume_id == e.volume_id)
            .and_then(|v| v.pages.iter().find(|p| p.page_index == page_index))
            .ok_or_else(|| Error::NotFound {
                kind: "page",
                id: e.doc_id.clone(),
            })?;
        let file = format!("pages/{}_p{page_index:04}.txt", file_safe(&e.volume_id));
        let mut text = page.text();
        text.push('\n');
        formats::write_atomic(&out_dir.join(&file), text.as_bytes())?;
        pages.push(ManifestEntry {
            rank: i + 1,
            doc_id: e.doc_id.clone(),
            volume_id: e.volume_id.clone(),
            page_index,
            label: e.label.clone(),
            distance: e.distance,
            file,
        });
    }
    let manifest = AnnotationManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        model_id: model_id.to_owned(),
        query_topics: ranking.query_topics.clone(),
        pages,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    formats::write_json(&manifest_path(out_dir), &manifest)?;
    Ok(manifest)
}

pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join("manifest.json")
}

pub fn read_manifest(out_dir: &Path) -> Result<AnnotationManifest> {
    formats::read_json(&manifest_path(out_dir))
}
