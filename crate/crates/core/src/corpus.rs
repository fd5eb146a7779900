//! Vocabularies and granularity-tagged corpora.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::fingerprint::Fnv64;
use crate::stoplist::Stoplist;
use crate::textprep::{split_sentences, tokenize, Volume};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("no volumes supplied")]
    NoVolumes,
    #[error("duplicate volume id {0}")]
    DuplicateVolumeId(String),
    #[error("filtering removed every token")]
    AllDocumentsEmpty,
}

/// Document unit of a corpus, from coarsest to finest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Volume,
    Page,
    Sentence,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Volume => "volume",
            Self::Page => "page",
            Self::Sentence => "sentence",
        }
    }

    pub fn is_finer_than(self, other: Self) -> bool {
        self > other
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "volume" => Ok(Self::Volume),
            "page" => Ok(Self::Page),
            "sentence" => Ok(Self::Sentence),
            other => Err(format!("unknown granularity {other:?}")),
        }
    }
}

/// Where a document came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub volume_id: String,
    pub page_index: Option<u32>,
    pub sentence_index: Option<u32>,
}

impl Provenance {
    pub fn granularity(&self) -> Granularity {
        match (self.page_index, self.sentence_index) {
            (_, Some(_)) => Granularity::Sentence,
            (Some(_), None) => Granularity::Page,
            (None, None) => Granularity::Volume,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<u32>,
    pub provenance: Provenance,
    pub label: String,
}

/// Word ↔ id bijection with corpus-wide counts. Ids follow lexicographic
/// word order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    words: Vec<String>,
    counts: Vec<u64>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Self::from_parts(r.words, r.counts)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            words: v.words,
            counts: v.counts,
        }
    }
}

impl Vocabulary {
    /// Builds from sorted `(word, count)` pairs.
    fn from_sorted(entries: impl IntoIterator<Item = (String, u64)>) -> Self {
        let (words, counts): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        Self::from_parts(words, counts)
    }

    pub fn from_parts(words: Vec<String>, counts: Vec<u64>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Self {
            words,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> Option<u64> {
        self.counts.get(id as usize).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// True when ids and words are in one-to-one correspondence.
    pub fn is_bijection(&self) -> bool {
        self.index.len() == self.words.len()
            && self.counts.len() == self.words.len()
            && self
                .words
                .iter()
                .enumerate()
                .all(|(i, w)| self.index.get(w) == Some(&(i as u32)))
    }

    /// Order-sensitive hash of the word list.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u64(self.words.len() as u64);
        for w in &self.words {
            h.write_str(w);
        }
        h.finish()
    }
}

/// Rules applied when a corpus is built; carried by the corpus so that
/// children are rebuilt the same way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub stoplist: Stoplist,
    /// Words whose corpus-wide count is at most this value are dropped.
    pub min_count_exclusive: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            stoplist: Stoplist::english(),
            min_count_exclusive: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub corpus_id: String,
    pub granularity: Granularity,
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub parent_corpus_id: Option<String>,
    pub options: BuildOptions,
    /// Ids of units that were empty after filtering and therefore left out.
    pub dropped_documents: Vec<String>,
}

impl Corpus {
    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    /// Distinct source volumes, in first-appearance order.
    pub fn volume_ids(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.documents
            .iter()
            .map(|d| d.provenance.volume_id.as_str())
            .filter(|v| seen.insert(*v))
            .collect()
    }

    /// Content address over everything except the id itself.
    pub fn content_id(&self) -> String {
        let mut h = Fnv64::new();
        h.write_str(self.granularity.as_str());
        h.write_u64(self.vocabulary.hash());
        for c in self.vocabulary.counts() {
            h.write_u64(*c);
        }
        h.write_str(self.parent_corpus_id.as_deref().unwrap_or(""));
        h.write_u64(self.options.min_count_exclusive);
        for w in self.options.stoplist.iter() {
            h.write_str(w);
        }
        for d in &self.documents {
            h.write_str(&d.doc_id);
            h.write_str(&d.label);
            h.write_str(&d.provenance.volume_id);
            h.write_u64(d.provenance.page_index.map_or(u64::MAX, u64::from));
            h.write_u64(d.provenance.sentence_index.map_or(u64::MAX, u64::from));
            h.write_u64(d.tokens.len() as u64);
            for t in &d.tokens {
                h.write(&t.to_le_bytes());
            }
        }
        for d in &self.dropped_documents {
            h.write_str(d);
        }
        format!("c{:016x}", h.finish())
    }

    /// Checks the structural invariants: valid token ids, provenance matching
    /// the granularity, unique doc ids, and a bijective vocabulary.
    pub fn validate(&self) -> Result<(), String> {
        if !self.vocabulary.is_bijection() {
            return Err("vocabulary is not a bijection".into());
        }
        let v = self.vocabulary.len() as u32;
        let mut ids = BTreeSet::new();
        for d in &self.documents {
            if !ids.insert(d.doc_id.as_str()) {
                return Err(format!("duplicate doc id {}", d.doc_id));
            }
            if d.tokens.iter().any(|&t| t >= v) {
                return Err(format!("document {} has out-of-range token", d.doc_id));
            }
            if d.provenance.granularity() != self.granularity {
                return Err(format!(
                    "document {} provenance does not match granularity",
                    d.doc_id
                ));
            }
        }
        Ok(())
    }
}

struct Unit {
    doc_id: String,
    provenance: Provenance,
    label: String,
    words: Vec<String>,
}

fn page_doc_id(volume_id: &str, page: u32) -> String {
    format!("{volume_id}/p{page:04}")
}

fn segment(volumes: &[Volume], granularity: Granularity, stoplist: &Stoplist) -> Vec<Unit> {
    let mut units = Vec::new();
    for vol in volumes {
        match granularity {
            Granularity::Volume => {
                let mut words = Vec::new();
                for page in &vol.pages {
                    words.extend(tokenize(&page.text(), stoplist));
                }
                units.push(Unit {
                    doc_id: vol.volume_id.clone(),
                    provenance: Provenance {
                        volume_id: vol.volume_id.clone(),
                        page_index: None,
                        sentence_index: None,
                    },
                    label: vol.title.clone(),
                    words,
                });
            }
            Granularity::Page => {
                for page in &vol.pages {
                    units.push(Unit {
                        doc_id: page_doc_id(&vol.volume_id, page.page_index),
                        provenance: Provenance {
                            volume_id: vol.volume_id.clone(),
                            page_index: Some(page.page_index),
                            sentence_index: None,
                        },
                        label: format!("{}, p. {}", vol.title, page.page_index + 1),
                        words: tokenize(&page.text(), stoplist),
                    });
                }
            }
            Granularity::Sentence => {
                for page in &vol.pages {
                    for (si, sentence) in split_sentences(&page.text()).iter().enumerate() {
                        let si = si as u32;
                        units.push(Unit {
                            doc_id: format!(
                                "{}/s{si:04}",
                                page_doc_id(&vol.volume_id, page.page_index)
                            ),
                            provenance: Provenance {
                                volume_id: vol.volume_id.clone(),
                                page_index: Some(page.page_index),
                                sentence_index: Some(si),
                            },
                            label: format!(
                                "{}, p. {}, s. {}",
                                vol.title,
                                page.page_index + 1,
                                si + 1
                            ),
                            words: tokenize(sentence, stoplist),
                        });
                    }
                }
            }
        }
    }
    units
}

/// Segments cleaned volumes at `granularity`, tokenizes, and builds the
/// frequency-filtered vocabulary. Units left empty are dropped and listed in
/// `dropped_documents`.
pub fn build_corpus(
    volumes: &[Volume],
    granularity: Granularity,
    options: &BuildOptions,
) -> Result<Corpus, CorpusError> {
    if volumes.is_empty() {
        return Err(CorpusError::NoVolumes);
    }
    let mut seen = BTreeSet::new();
    for v in volumes {
        if !seen.insert(v.volume_id.as_str()) {
            return Err(CorpusError::DuplicateVolumeId(v.volume_id.clone()));
        }
    }

    let units = segment(volumes, granularity, &options.stoplist);
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for u in &units {
        for w in &u.words {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let vocabulary = Vocabulary::from_sorted(
        counts
            .into_iter()
            .filter(|&(_, c)| c > options.min_count_exclusive)
            .map(|(w, c)| (String::from(w), c)),
    );

    let mut documents = Vec::new();
    let mut dropped_documents = Vec::new();
    for u in units {
        let tokens: Vec<u32> = u.words.iter().filter_map(|w| vocabulary.id(w)).collect();
        if tokens.is_empty() {
            dropped_documents.push(u.doc_id);
        } else {
            documents.push(Document {
                doc_id: u.doc_id,
                tokens,
                provenance: u.provenance,
                label: u.label,
            });
        }
    }
    if documents.is_empty() {
        return Err(CorpusError::AllDocumentsEmpty);
    }

    let mut corpus = Corpus {
        corpus_id: String::new(),
        granularity,
        documents,
        vocabulary,
        parent_corpus_id: None,
        options: options.clone(),
        dropped_documents,
    };
    corpus.corpus_id = corpus.content_id();
    Ok(corpus)
}
