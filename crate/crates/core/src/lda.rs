//! Latent Dirichlet allocation trained by collapsed Gibbs sampling.
//!
//! Each sweep visits documents in corpus order and tokens in position order.
//! A token's topic is resampled from
//!
//! ```text
//! P(z = t | rest) ∝ (n_dt[d][t] + α) · (n_tw[t][w] + β) / (n_t[t] + V·β)
//! ```
//!
//! with the token's own assignment removed from the counts. After the last
//! sweep, `phi[t][w] = (n_tw[t][w] + β) / (n_t[t] + V·β)` and
//! `theta[d][t] = (n_dt[d][t] + α) / (len(d) + k·α)`, optionally averaged
//! over the final `average_last` sweeps.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Granularity, Provenance};
use crate::rng::SampleRng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LdaError {
    #[error("corpus has no documents or an empty document")]
    EmptyCorpus,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("model and corpus vocabularies differ")]
    ModelCorpusMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: u32,
    pub seed: u64,
    /// Number of final sweeps whose estimates are averaged into phi/theta.
    pub average_last: u32,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            k: 60,
            alpha: 0.1,
            beta: 0.1,
            iterations: 1000,
            seed: 42,
            average_last: 1,
        }
    }
}

impl LdaParams {
    pub fn validate(&self) -> Result<(), LdaError> {
        if self.k == 0 {
            return Err(LdaError::InvalidParams("k must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(LdaError::InvalidParams("alpha must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(LdaError::InvalidParams("beta must be positive"));
        }
        if self.iterations == 0 {
            return Err(LdaError::InvalidParams("iterations must be at least 1"));
        }
        if self.average_last == 0 || self.average_last > self.iterations {
            return Err(LdaError::InvalidParams(
                "average_last must be in 1..=iterations",
            ));
        }
        Ok(())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }
}

impl<T> core::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Identity and display metadata for a modeled document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_id: String,
    pub provenance: Provenance,
    pub label: String,
}

/// A trained model. It carries its vocabulary and document metadata so
/// queries need no corpus; `vocab_hash` ties it to the corpus it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub params: LdaParams,
    pub corpus_id: String,
    pub granularity: Granularity,
    pub vocab: Vec<String>,
    pub vocab_hash: u64,
    pub docs: Vec<DocMeta>,
    /// k × V
    pub phi: Matrix<f64>,
    /// D × k
    pub theta: Matrix<f64>,
    pub assignments: Vec<Vec<u32>>,
    /// D × k
    pub n_dt: Matrix<u32>,
    /// k × V
    pub n_tw: Matrix<u32>,
    pub n_t: Vec<u32>,
}

impl LdaModel {
    pub fn k(&self) -> usize {
        self.params.k as usize
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.vocab.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.docs.iter().position(|d| d.doc_id == doc_id)
    }

    /// The `n` most probable words of topic `t`, ties by word id.
    pub fn top_words(&self, t: usize, n: usize) -> Vec<(&str, f64)> {
        let row = self.phi.row(t);
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        ids.into_iter()
            .take(n)
            .map(|w| (self.vocab[w].as_str(), row[w]))
            .collect()
    }

    /// Errors unless the corpus has the vocabulary and documents this model
    /// was trained on.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<(), LdaError> {
        let same_docs = corpus.documents.len() == self.docs.len()
            && corpus
                .documents
                .iter()
                .zip(self.docs.iter().zip(&self.assignments))
                .all(|(d, (m, z))| d.doc_id == m.doc_id && d.tokens.len() == z.len());
        if corpus.vocabulary.hash() != self.vocab_hash || !same_docs {
            return Err(LdaError::ModelCorpusMismatch);
        }
        Ok(())
    }

    /// Σ_d Σ_i log Σ_t theta[d][t]·phi[t][w_i].
    pub fn log_likelihood(&self, corpus: &Corpus) -> Result<f64, LdaError> {
        self.check_corpus(corpus)?;
        Ok(corpus_log_likelihood(corpus, &self.phi, &self.theta))
    }

    /// Verifies the count identities against the stored assignments. The
    /// topic-word table cannot be checked without token ids, so only its
    /// row sums are compared.
    pub fn counts_consistent(&self) -> bool {
        let k = self.k();
        for (d, z) in self.assignments.iter().enumerate() {
            let mut row = vec![0u32; k];
            for &t in z {
                match row.get_mut(t as usize) {
                    Some(c) => *c += 1,
                    None => return false,
                }
            }
            if row.as_slice() != self.n_dt.row(d) {
                return false;
            }
        }
        let by_rows = self.n_tw.iter_rows().zip(&self.n_t).all(|(row, &total)| {
            row.iter().map(|&c| u64::from(c)).sum::<u64>() == u64::from(total)
        });
        let tokens: usize = self.assignments.iter().map(Vec::len).sum();
        let n_t_total: u64 = self.n_t.iter().map(|&c| u64::from(c)).sum();
        by_rows && n_t_total == tokens as u64
    }
}

fn corpus_log_likelihood(corpus: &Corpus, phi: &Matrix<f64>, theta: &Matrix<f64>) -> f64 {
    let k = phi.rows();
    let mut ll = 0.0;
    for (d, doc) in corpus.documents.iter().enumerate() {
        let th = theta.row(d);
        for &w in &doc.tokens {
            let p: f64 = (0..k).map(|t| th[t] * phi[(t, w as usize)]).sum();
            ll += libm::log(p);
        }
    }
    ll
}

/// Collapsed Gibbs sampler with explicit sweeps, so callers can observe
/// progress and the count tables between sweeps.
pub struct GibbsSampler<'a> {
    corpus: &'a Corpus,
    params: LdaParams,
    vocab_len: usize,
    z: Vec<Vec<u32>>,
    n_dt: Matrix<u32>,
    n_tw: Matrix<u32>,
    n_t: Vec<u32>,
    rng: SampleRng,
    sweeps: u32,
    weights: Vec<f64>,
    phi_sum: Matrix<f64>,
    theta_sum: Matrix<f64>,
    averaged: u32,
}

impl<'a> GibbsSampler<'a> {
    /// Validates inputs and draws the initial topic of every token
    /// uniformly.
    pub fn new(corpus: &'a Corpus, params: LdaParams) -> Result<Self, LdaError> {
        params.validate()?;
        if corpus.documents.is_empty() || corpus.documents.iter().any(|d| d.tokens.is_empty()) {
            return Err(LdaError::EmptyCorpus);
        }
        let k = params.k as usize;
        let vocab_len = corpus.vocabulary.len();
        let num_docs = corpus.documents.len();
        let mut rng = SampleRng::new(params.seed);
        let mut n_dt = Matrix::zeros(num_docs, k);
        let mut n_tw = Matrix::zeros(k, vocab_len);
        let mut n_t = vec![0u32; k];
        let mut z = Vec::with_capacity(num_docs);
        for (d, doc) in corpus.documents.iter().enumerate() {
            let mut zd = Vec::with_capacity(doc.tokens.len());
            for &w in &doc.tokens {
                let t = rng.below(k);
                n_dt[(d, t)] += 1;
                n_tw[(t, w as usize)] += 1;
                n_t[t] += 1;
                zd.push(t as u32);
            }
            z.push(zd);
        }
        Ok(Self {
            corpus,
            params,
            vocab_len,
            z,
            n_dt,
            n_tw,
            n_t,
            rng,
            sweeps: 0,
            weights: vec![0.0; k],
            phi_sum: Matrix::zeros(k, vocab_len),
            theta_sum: Matrix::zeros(num_docs, k),
            averaged: 0,
        })
    }

    pub fn sweeps_done(&self) -> u32 {
        self.sweeps
    }

    pub fn is_finished(&self) -> bool {
        self.sweeps >= self.params.iterations
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn doc_topic_counts(&self) -> &Matrix<u32> {
        &self.n_dt
    }

    pub fn topic_word_counts(&self) -> &Matrix<u32> {
        &self.n_tw
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.n_t
    }

    /// One full pass over every token.
    pub fn sweep(&mut self) {
        let alpha = self.params.alpha;
        let beta = self.params.beta;
        let v_beta = self.vocab_len as f64 * beta;
        for (d, doc) in self.corpus.documents.iter().enumerate() {
            for (i, &w) in doc.tokens.iter().enumerate() {
                let w = w as usize;
                let old = self.z[d][i] as usize;
                self.n_dt[(d, old)] -= 1;
                self.n_tw[(old, w)] -= 1;
                self.n_t[old] -= 1;

                let dt = self.n_dt.row(d);
                let mut total = 0.0;
                for (t, &c) in dt.iter().enumerate() {
                    let p = (f64::from(c) + alpha) * (f64::from(self.n_tw[(t, w)]) + beta)
                        / (f64::from(self.n_t[t]) + v_beta);
                    self.weights[t] = p;
                    total += p;
                }
                let new = self.rng.weighted(&self.weights, total);

                self.n_dt[(d, new)] += 1;
                self.n_tw[(new, w)] += 1;
                self.n_t[new] += 1;
                self.z[d][i] = new as u32;
            }
        }
        self.sweeps += 1;
        if self.sweeps + self.params.average_last > self.params.iterations {
            let (phi, theta) = self.estimate();
            for (acc, x) in self.phi_sum.data.iter_mut().zip(phi.data) {
                *acc += x;
            }
            for (acc, x) in self.theta_sum.data.iter_mut().zip(theta.data) {
                *acc += x;
            }
            self.averaged += 1;
        }
    }

    /// phi and theta read from the current counts.
    pub fn estimate(&self) -> (Matrix<f64>, Matrix<f64>) {
        let k = self.params.k as usize;
        let alpha = self.params.alpha;
        let beta = self.params.beta;
        let v_beta = self.vocab_len as f64 * beta;
        let mut phi = Matrix::zeros(k, self.vocab_len);
        for t in 0..k {
            let denom = f64::from(self.n_t[t]) + v_beta;
            for (w, out) in phi.row_mut(t).iter_mut().enumerate() {
                *out = (f64::from(self.n_tw[(t, w)]) + beta) / denom;
            }
        }
        let mut theta = Matrix::zeros(self.z.len(), k);
        for (d, zd) in self.z.iter().enumerate() {
            let denom = zd.len() as f64 + k as f64 * alpha;
            for (t, out) in theta.row_mut(d).iter_mut().enumerate() {
                *out = (f64::from(self.n_dt[(d, t)]) + alpha) / denom;
            }
        }
        (phi, theta)
    }

    /// Log-likelihood of the corpus under the current estimate.
    pub fn log_likelihood(&self) -> f64 {
        let (phi, theta) = self.estimate();
        corpus_log_likelihood(self.corpus, &phi, &theta)
    }

    /// Runs any remaining sweeps and freezes the model.
    pub fn finish(mut self) -> LdaModel {
        while !self.is_finished() {
            self.sweep();
        }
        let (phi, theta) = if self.averaged <= 1 {
            self.estimate()
        } else {
            let m = f64::from(self.averaged);
            let mut phi = self.phi_sum.clone();
            phi.data.iter_mut().for_each(|x| *x /= m);
            let mut theta = self.theta_sum.clone();
            theta.data.iter_mut().for_each(|x| *x /= m);
            (phi, theta)
        };
        let corpus = self.corpus;
        LdaModel {
            params: self.params,
            corpus_id: corpus.corpus_id.clone(),
            granularity: corpus.granularity,
            vocab: corpus.vocabulary.words().to_vec(),
            vocab_hash: corpus.vocabulary.hash(),
            docs: corpus
                .documents
                .iter()
                .map(|d| DocMeta {
                    doc_id: d.doc_id.clone(),
                    provenance: d.provenance.clone(),
                    label: d.label.clone(),
                })
                .collect(),
            phi,
            theta,
            assignments: self.z,
            n_dt: self.n_dt,
            n_tw: self.n_tw,
            n_t: self.n_t,
        }
    }
}

/// Trains a model with `params.iterations` sweeps.
pub fn train(corpus: &Corpus, params: LdaParams) -> Result<LdaModel, LdaError> {
    Ok(GibbsSampler::new(corpus, params)?.finish())
}

/// Estimates a topic vector for unseen tokens by Gibbs sampling with phi
/// held fixed. Tokens are sorted first, so any permutation of the same
/// multiset gives the same vector.
pub fn fold_in(model: &LdaModel, tokens: &[u32], sweeps: u32, seed: u64) -> Vec<f64> {
    let k = model.k();
    let alpha = model.params.alpha;
    let mut tokens = tokens.to_vec();
    tokens.sort_unstable();
    let mut rng = SampleRng::new(seed);
    let mut counts = vec![0u32; k];
    let mut z: Vec<usize> = tokens
        .iter()
        .map(|_| {
            let t = rng.below(k);
            counts[t] += 1;
            t
        })
        .collect();
    let mut weights = vec![0.0; k];
    for _ in 0..sweeps {
        for (i, &w) in tokens.iter().enumerate() {
            counts[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                let p = (f64::from(counts[t]) + alpha) * model.phi[(t, w as usize)];
                weights[t] = p;
                total += p;
            }
            let new = rng.weighted(&weights, total);
            counts[new] += 1;
            z[i] = new;
        }
    }
    let denom = tokens.len() as f64 + k as f64 * alpha;
    counts
        .iter()
        .map(|&c| (f64::from(c) + alpha) / denom)
        .collect()
}
