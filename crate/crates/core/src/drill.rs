//! Corpus reduction steps of the drill-down loop: keep a subset of
//! documents, or re-segment the retained volumes at a finer granularity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{build_corpus, Corpus, CorpusError, Document, Granularity, Vocabulary};
use crate::textprep::Volume;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DrillError {
    #[error("unknown document id {0}")]
    UnknownDocId(String),
    #[error("{requested} is not finer than {current}")]
    NotFiner {
        current: Granularity,
        requested: Granularity,
    },
    #[error("source text for volume {0} is not available")]
    MissingVolume(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Child corpus holding exactly the documents in `keep`.
///
/// The vocabulary is rebuilt from the retained documents with the parent's
/// frequency rule; documents left empty by the stricter filter are dropped.
/// Rebuilding from retained token ids gives the same result as rebuilding
/// from retained text, because a word filtered out of the parent has at most
/// the same count in any subset.
pub fn filter_corpus(corpus: &Corpus, keep: &BTreeSet<String>) -> Result<Corpus, DrillError> {
    let known: BTreeSet<&str> = corpus.documents.iter().map(|d| d.doc_id.as_str()).collect();
    if let Some(missing) = keep.iter().find(|id| !known.contains(id.as_str())) {
        return Err(DrillError::UnknownDocId(missing.clone()));
    }

    let retained: Vec<&Document> = corpus
        .documents
        .iter()
        .filter(|d| keep.contains(&d.doc_id))
        .collect();

    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for d in &retained {
        for &t in &d.tokens {
            *counts.entry(t).or_default() += 1;
        }
    }
    // old ids are in lexicographic word order, so the surviving ids are too
    let survivors: Vec<(u32, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c > corpus.options.min_count_exclusive)
        .collect();
    let remap: BTreeMap<u32, u32> = survivors
        .iter()
        .enumerate()
        .map(|(new, &(old, _))| (old, new as u32))
        .collect();
    let vocabulary = Vocabulary::from_parts(
        survivors
            .iter()
            .map(|&(old, _)| String::from(corpus.vocabulary.word(old).unwrap_or_default()))
            .collect(),
        survivors.iter().map(|&(_, c)| c).collect(),
    );

    let mut documents = Vec::new();
    let mut dropped_documents = Vec::new();
    for d in retained {
        let tokens: Vec<u32> = d
            .tokens
            .iter()
            .filter_map(|t| remap.get(t).copied())
            .collect();
        if tokens.is_empty() {
            dropped_documents.push(d.doc_id.clone());
        } else {
            documents.push(Document {
                tokens,
                ..d.clone()
            });
        }
    }
    if documents.is_empty() {
        return Err(CorpusError::AllDocumentsEmpty.into());
    }

    let mut child = Corpus {
        corpus_id: String::new(),
        granularity: corpus.granularity,
        documents,
        vocabulary,
        parent_corpus_id: Some(corpus.corpus_id.clone()),
        options: corpus.options.clone(),
        dropped_documents,
    };
    child.corpus_id = child.content_id();
    Ok(child)
}

/// Re-segments the volumes represented in `corpus` at `finer` granularity,
/// using the same cleanup and vocabulary rules. `volumes` supplies the
/// cleaned source text and may contain volumes outside the corpus.
pub fn drill(
    corpus: &Corpus,
    finer: Granularity,
    volumes: &[Volume],
) -> Result<Corpus, DrillError> {
    if !finer.is_finer_than(corpus.granularity) {
        return Err(DrillError::NotFiner {
            current: corpus.granularity,
            requested: finer,
        });
    }
    let by_id: BTreeMap<&str, &Volume> =
        volumes.iter().map(|v| (v.volume_id.as_str(), v)).collect();
    let selected = corpus
        .volume_ids()
        .into_iter()
        .map(|id| {
            by_id
                .get(id)
                .map(|v| (*v).clone())
                .ok_or_else(|| DrillError::MissingVolume(String::from(id)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut child = build_corpus(&selected, finer, &corpus.options)?;
    child.parent_corpus_id = Some(corpus.corpus_id.clone());
    child.corpus_id = child.content_id();
    Ok(child)
}
