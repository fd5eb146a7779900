//! Topic queries and topic-distance rankings over a trained model.
//!
//! A topic is compared to a document as the basis vector `e_t` in topic
//! space, so `1 − cos(e_t, θ_d) = 1 − θ_d[t] / ‖θ_d‖`. Multi-topic rankings
//! sum the per-topic distances.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Granularity;
use crate::lda::{fold_in, LdaModel};
use crate::stoplist::Stoplist;
use crate::textprep::tokenize;

/// Gibbs sweeps used to fold raw query text into topic space.
pub const FOLD_IN_SWEEPS: u32 = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrievalError {
    #[error("none of the query words are in the vocabulary")]
    NoQueryWordInVocabulary,
    #[error("unknown topic {0}")]
    UnknownTopic(u32),
    #[error("unknown document {0}")]
    UnknownDocument(String),
    #[error("no query topics given")]
    NoTopics,
    #[error("topic {0} repeated in query")]
    DuplicateTopic(u32),
    #[error("expected a {expected}-granularity ranking, got {actual}")]
    WrongGranularity {
        expected: Granularity,
        actual: Granularity,
    },
    #[error("query text has no in-vocabulary tokens")]
    EmptyAfterFiltering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScore {
    pub topic: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRanking {
    /// In-vocabulary query words that contributed to the scores.
    pub query_words: Vec<String>,
    /// Query words ignored because they are not in the vocabulary.
    pub ignored_words: Vec<String>,
    pub entries: Vec<TopicScore>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Sum of per-topic basis-vector distances.
    Sum,
    /// Distance between two topic vectors.
    Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    pub doc_id: String,
    pub label: String,
    pub volume_id: String,
    pub page_index: Option<u32>,
    pub distance: f64,
}

impl RankedDoc {
    pub fn similarity(&self) -> f64 {
        1.0 - self.distance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRanking {
    pub granularity: Granularity,
    pub query_topics: Vec<u32>,
    pub aggregation: Aggregation,
    pub entries: Vec<RankedDoc>,
}

impl DocRanking {
    /// Entries with distance ≤ `threshold`, in ranking order.
    pub fn within(&self, threshold: f64) -> Vec<&RankedDoc> {
        self.entries
            .iter()
            .filter(|e| e.distance <= threshold)
            .collect()
    }
}

fn sort_topics(entries: &mut [TopicScore]) {
    entries.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.topic.cmp(&b.topic)));
}

fn sort_docs(entries: &mut [RankedDoc]) {
    entries.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
}

/// Ranks topics by the summed probability of the distinct in-vocabulary
/// query words, summed in vocabulary order.
pub fn topic_query<S: AsRef<str>>(
    model: &LdaModel,
    words: &[S],
    top_n: usize,
) -> Result<TopicRanking, RetrievalError> {
    let mut ids = BTreeSet::new();
    let mut query_words = Vec::new();
    let mut ignored_words = Vec::new();
    for w in words {
        let w = w.as_ref();
        match model.word_id(w) {
            Some(id) => {
                if ids.insert(id) {
                    query_words.push(w.to_string());
                }
            }
            None => ignored_words.push(w.to_string()),
        }
    }
    if ids.is_empty() {
        return Err(RetrievalError::NoQueryWordInVocabulary);
    }
    let mut entries: Vec<TopicScore> = (0..model.k())
        .map(|t| TopicScore {
            topic: t as u32,
            score: ids.iter().map(|&w| model.phi[(t, w)]).sum(),
        })
        .collect();
    sort_topics(&mut entries);
    entries.truncate(top_n);
    Ok(TopicRanking {
        query_words,
        ignored_words,
        entries,
    })
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// `1 − cos(e_t, θ)`, clamped to `[0, 1]` for non-negative θ.
pub fn basis_distance(theta: &[f64], topic: usize) -> f64 {
    let n = norm(theta);
    if n == 0.0 {
        return 1.0;
    }
    (1.0 - theta[topic] / n).clamp(0.0, 1.0)
}

/// `1 − cos(a, b)`; exactly 0 for identical vectors.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 0.0;
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (1.0 - dot / (na * nb)).clamp(0.0, 2.0)
}

fn check_topic(model: &LdaModel, topic: u32) -> Result<usize, RetrievalError> {
    let t = topic as usize;
    if t < model.k() {
        Ok(t)
    } else {
        Err(RetrievalError::UnknownTopic(topic))
    }
}

pub fn topic_doc_distance(
    model: &LdaModel,
    topic: u32,
    doc_id: &str,
) -> Result<f64, RetrievalError> {
    let t = check_topic(model, topic)?;
    let d = model
        .doc_index(doc_id)
        .ok_or_else(|| RetrievalError::UnknownDocument(doc_id.to_string()))?;
    Ok(basis_distance(model.theta.row(d), t))
}

fn ranked(model: &LdaModel, d: usize, distance: f64) -> RankedDoc {
    let meta = &model.docs[d];
    RankedDoc {
        doc_id: meta.doc_id.clone(),
        label: meta.label.clone(),
        volume_id: meta.provenance.volume_id.clone(),
        page_index: meta.provenance.page_index,
        distance,
    }
}

/// Ranks every document by the sum of its distances to `topics`, ascending.
/// `top_n = None` keeps the full ranking.
pub fn rank_docs(
    model: &LdaModel,
    topics: &[u32],
    top_n: Option<usize>,
) -> Result<DocRanking, RetrievalError> {
    if topics.is_empty() {
        return Err(RetrievalError::NoTopics);
    }
    let mut seen = BTreeSet::new();
    let mut ts = Vec::with_capacity(topics.len());
    for &t in topics {
        if !seen.insert(t) {
            return Err(RetrievalError::DuplicateTopic(t));
        }
        ts.push(check_topic(model, t)?);
    }
    let mut entries: Vec<RankedDoc> = (0..model.num_docs())
        .map(|d| {
            let theta = model.theta.row(d);
            let distance = ts.iter().map(|&t| basis_distance(theta, t)).sum();
            ranked(model, d, distance)
        })
        .collect();
    sort_docs(&mut entries);
    if let Some(n) = top_n {
        entries.truncate(n);
    }
    Ok(DocRanking {
        granularity: model.granularity,
        query_topics: topics.to_vec(),
        aggregation: Aggregation::Sum,
        entries,
    })
}

/// Documents whose distance is at most `threshold`.
pub fn filter_by_threshold(ranking: &DocRanking, threshold: f64) -> BTreeSet<String> {
    ranking
        .entries
        .iter()
        .filter(|e| e.distance <= threshold)
        .map(|e| e.doc_id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHits {
    pub volume_id: String,
    pub pages: usize,
    pub best_distance: f64,
}

/// Counts, per volume, the pages among the first `top_pages` entries of a
/// page ranking and returns the `top_volumes` volumes with the most hits.
/// Ties go to the smaller best-page distance, then the smaller volume id.
pub fn rank_volumes_by_page_hits(
    ranking: &DocRanking,
    top_pages: usize,
    top_volumes: usize,
) -> Result<Vec<VolumeHits>, RetrievalError> {
    if ranking.granularity != Granularity::Page {
        return Err(RetrievalError::WrongGranularity {
            expected: Granularity::Page,
            actual: ranking.granularity,
        });
    }
    let mut hits: BTreeMap<&str, VolumeHits> = BTreeMap::new();
    for e in ranking.entries.iter().take(top_pages) {
        let h = hits
            .entry(e.volume_id.as_str())
            .or_insert_with(|| VolumeHits {
                volume_id: e.volume_id.clone(),
                pages: 0,
                best_distance: f64::INFINITY,
            });
        h.pages += 1;
        if e.distance < h.best_distance {
            h.best_distance = e.distance;
        }
    }
    let mut out: Vec<VolumeHits> = hits.into_values().collect();
    out.sort_by(|a, b| {
        b.pages
            .cmp(&a.pages)
            .then(a.best_distance.total_cmp(&b.best_distance))
            .then_with(|| a.volume_id.cmp(&b.volume_id))
    });
    out.truncate(top_volumes);
    Ok(out)
}

/// Query for [`similar_sentences`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SentenceQuery<'a> {
    /// A sentence already in the model.
    Doc(&'a str),
    /// Unseen text, folded into topic space.
    Text(&'a str),
}

/// Ranks the model's sentences by cosine distance to the query's topic
/// vector. An in-model query is always ranked first among ties.
pub fn similar_sentences(
    model: &LdaModel,
    query: SentenceQuery<'_>,
    top_n: Option<usize>,
) -> Result<DocRanking, RetrievalError> {
    if model.granularity != Granularity::Sentence {
        return Err(RetrievalError::WrongGranularity {
            expected: Granularity::Sentence,
            actual: model.granularity,
        });
    }
    let (query_vec, self_index) = match query {
        SentenceQuery::Doc(id) => {
            let d = model
                .doc_index(id)
                .ok_or_else(|| RetrievalError::UnknownDocument(id.to_string()))?;
            (model.theta.row(d).to_vec(), Some(d))
        }
        SentenceQuery::Text(text) => {
            let tokens: Vec<u32> = tokenize(text, &Stoplist::empty())
                .iter()
                .filter_map(|w| model.word_id(w))
                .map(|id| id as u32)
                .collect();
            if tokens.is_empty() {
                return Err(RetrievalError::EmptyAfterFiltering);
            }
            (
                fold_in(model, &tokens, FOLD_IN_SWEEPS, model.params.seed),
                None,
            )
        }
    };
    let mut entries: Vec<(bool, RankedDoc)> = (0..model.num_docs())
        .map(|d| {
            let distance = if Some(d) == self_index {
                0.0
            } else {
                cosine_distance(&query_vec, model.theta.row(d))
            };
            (Some(d) == self_index, ranked(model, d, distance))
        })
        .collect();
    entries.sort_by(|(sa, a), (sb, b)| {
        a.distance
            .total_cmp(&b.distance)
            .then(sb.cmp(sa))
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    let mut entries: Vec<RankedDoc> = entries.into_iter().map(|(_, e)| e).collect();
    if let Some(n) = top_n {
        entries.truncate(n);
    }
    Ok(DocRanking {
        granularity: Granularity::Sentence,
        query_topics: Vec::new(),
        aggregation: Aggregation::Vector,
        entries,
    })
}
