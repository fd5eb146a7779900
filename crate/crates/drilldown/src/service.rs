//! Store-backed operations shared by the CLI and the HTTP server. Every
//! output type here is what both front ends serialize.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::Duration;

use drilldown_core::lda::GibbsSampler;
use drilldown_core::retrieval::{self, DocRanking, SentenceQuery};
use drilldown_core::scimap::{self, BookPlacement, CrosswalkTable, PlacementConfig, PlacementMode};
use drilldown_core::textprep::{clean_volume, HeaderConfig};
use drilldown_core::{
    build_corpus, BuildOptions, Corpus, Granularity, LdaModel, LdaParams, Stoplist, Volume,
};
use serde::{Deserialize, Serialize};

use crate::collection::{read_collection, read_stoplist};
use crate::error::{Error, Result};
use crate::formats::CollectionFile;
use crate::overlay::{
    self, CallNumberResolver, MetadataResolver, OverlayFile, TableResolver, Tier,
};
use crate::pipeline::{self, Action, AnnotationManifest, PipelineState};
use crate::store::{Store, StoreLock};

/// Default workflow parameters.
pub mod defaults {
    pub const K: u32 = 60;
    pub const ALPHA: f64 = 0.1;
    pub const BETA: f64 = 0.1;
    pub const ITERATIONS: u32 = 1000;
    pub const SEED: u64 = 42;
    pub const THRESHOLD: f64 = 1.25;
    pub const TOP_PAGES: usize = 800;
    pub const TOP_VOLUMES: usize = 6;
    pub const MIN_COUNT_EXCLUSIVE: u64 = 5;
    pub const TOP_WORDS: usize = 10;
}

fn default_granularity() -> Granularity {
    Granularity::Volume
}
fn default_min_count() -> u64 {
    defaults::MIN_COUNT_EXCLUSIVE
}
fn default_header_pages() -> usize {
    HeaderConfig::default().min_pages
}
fn default_header_fraction() -> f64 {
    HeaderConfig::default().min_fraction
}
fn default_k() -> u32 {
    defaults::K
}
fn default_alpha() -> f64 {
    defaults::ALPHA
}
fn default_beta() -> f64 {
    defaults::BETA
}
fn default_iterations() -> u32 {
    defaults::ITERATIONS
}
fn default_seed() -> u64 {
    defaults::SEED
}
fn one() -> u32 {
    1
}
fn default_threshold() -> f64 {
    defaults::THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub collection: PathBuf,
    #[serde(default = "default_granularity")]
    pub granularity: Granularity,
    #[serde(default = "default_min_count")]
    pub min_count_exclusive: u64,
    /// Stoplist file; the bundled English list when absent.
    #[serde(default)]
    pub stoplist: Option<PathBuf>,
    #[serde(default = "default_header_pages")]
    pub header_min_pages: usize,
    #[serde(default = "default_header_fraction")]
    pub header_min_fraction: f64,
}

impl IngestRequest {
    pub fn new(collection: impl Into<PathBuf>) -> Self {
        Self {
            collection: collection.into(),
            granularity: default_granularity(),
            min_count_exclusive: default_min_count(),
            stoplist: None,
            header_min_pages: default_header_pages(),
            header_min_fraction: default_header_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRequest {
    pub corpus_id: String,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_iterations")]
    pub iterations: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub average_last: u32,
}

impl TrainRequest {
    pub fn new(corpus_id: impl Into<String>) -> Self {
        Self {
            corpus_id: corpus_id.into(),
            k: defaults::K,
            alpha: defaults::ALPHA,
            beta: defaults::BETA,
            iterations: defaults::ITERATIONS,
            seed: defaults::SEED,
            average_last: 1,
        }
    }

    pub fn params(&self) -> LdaParams {
        LdaParams {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed: self.seed,
            average_last: self.average_last,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRequest {
    pub model_id: String,
    pub topics: Vec<u32>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrillRequest {
    pub corpus_id: String,
    pub to: Granularity,
    /// Restrict to these volumes before drilling.
    #[serde(default)]
    pub volumes: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub corpus_id: String,
    pub granularity: Granularity,
    pub documents: usize,
    pub volumes: usize,
    pub vocabulary_size: usize,
    pub total_tokens: usize,
    pub parent_corpus_id: Option<String>,
    pub dropped_documents: usize,
}

impl From<&Corpus> for CorpusSummary {
    fn from(c: &Corpus) -> Self {
        Self {
            corpus_id: c.corpus_id.clone(),
            granularity: c.granularity,
            documents: c.documents.len(),
            volumes: c.volume_ids().len(),
            vocabulary_size: c.vocabulary.len(),
            total_tokens: c.total_tokens(),
            parent_corpus_id: c.parent_corpus_id.clone(),
            dropped_documents: c.dropped_documents.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_id: String,
    pub corpus_id: String,
    pub granularity: Granularity,
    pub params: LdaParams,
    pub documents: usize,
    pub vocabulary_size: usize,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordProb {
    pub word: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWords {
    pub topic: u32,
    pub words: Vec<WordProb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicHit {
    pub topic: u32,
    pub score: f64,
    pub top_words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicQueryResult {
    pub query_words: Vec<String>,
    pub ignored_words: Vec<String>,
    pub topics: Vec<TopicHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDocsResult {
    pub ranking: DocRanking,
    pub threshold: Option<f64>,
    /// Doc ids with distance ≤ threshold, in ranking order.
    pub within_threshold: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub rank: usize,
    pub volume_id: String,
    pub title: String,
    pub pages: usize,
    pub best_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayStep {
    pub stage: usize,
    pub action: Action,
    pub expected: Option<String>,
    pub reproduced: Option<String>,
}

impl ReplayStep {
    pub fn matches(&self) -> bool {
        self.expected == self.reproduced
    }
}

#[derive(Debug, Clone)]
pub struct Workspace {
    store: Store,
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        Ok(Self {
            store: Store::open(root)?,
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    /// Waits for the store lock instead of failing with `Busy`.
    pub fn lock_blocking(&self) -> Result<StoreLock> {
        loop {
            match self.store.lock() {
                Err(Error::Busy) => std::thread::sleep(Duration::from_millis(20)),
                other => return other,
            }
        }
    }

    fn record(
        &self,
        action: Action,
        corpus_id: Option<String>,
        model_id: Option<String>,
        params: &impl Serialize,
    ) -> Result<()> {
        let mut state = self.store.load_pipeline()?;
        let params = serde_json::to_value(params).map_err(|e| Error::Invalid(e.to_string()))?;
        state.record(action, corpus_id, model_id, params);
        self.store.save_pipeline(&state)
    }

    pub fn pipeline(&self) -> Result<PipelineState> {
        self.store.load_pipeline()
    }

    /// Cleaned volumes of the store's root collection.
    pub fn volumes(&self) -> Result<Vec<Volume>> {
        let state = self.store.load_pipeline()?;
        let id = state.root_collection.ok_or_else(|| Error::NotFound {
            kind: "collection",
            id: "(none ingested)".into(),
        })?;
        Ok(self.store.load_collection(&id)?.volumes)
    }

    pub fn ingest(&self, req: &IngestRequest) -> Result<CorpusSummary> {
        let _lock = self.store.lock()?;
        self.ingest_locked(req)
    }

    fn ingest_locked(&self, req: &IngestRequest) -> Result<CorpusSummary> {
        let stoplist = match &req.stoplist {
            Some(p) => read_stoplist(p)?,
            None => Stoplist::english(),
        };
        let headers = HeaderConfig {
            min_pages: req.header_min_pages,
            min_fraction: req.header_min_fraction,
        };
        let raw = read_collection(&req.collection)?;
        let cleaned: Vec<Volume> = raw.iter().map(|v| clean_volume(v, &headers)).collect();
        let collection = CollectionFile::new(req.collection.display().to_string(), cleaned);

        let mut state = self.store.load_pipeline()?;
        match &state.root_collection {
            Some(existing) if *existing != collection.collection_id => {
                return Err(Error::Invalid(format!(
                    "store already holds collection {existing}; use a separate store per collection"
                )));
            }
            _ => {}
        }
        let options = BuildOptions {
            stoplist,
            min_count_exclusive: req.min_count_exclusive,
        };
        let corpus = build_corpus(&collection.volumes, req.granularity, &options)?;
        for dropped in &corpus.dropped_documents {
            tracing::info!(doc = %dropped, "dropped empty document");
        }
        self.store.put_collection(&collection)?;
        self.store.put_corpus(&corpus)?;
        state.root_collection = Some(collection.collection_id.clone());
        let params = serde_json::to_value(req).map_err(|e| Error::Invalid(e.to_string()))?;
        state.record(Action::Ingest, Some(corpus.corpus_id.clone()), None, params);
        self.store.save_pipeline(&state)?;
        Ok(CorpusSummary::from(&corpus))
    }

    pub fn corpus(&self, id: &str) -> Result<Corpus> {
        self.store.load_corpus(id)
    }

    pub fn corpus_summary(&self, id: &str) -> Result<CorpusSummary> {
        Ok(CorpusSummary::from(&self.store.load_corpus(id)?))
    }

    pub fn model(&self, id: &str) -> Result<LdaModel> {
        self.store.load_model(id)
    }

    /// Trains without holding the store lock, then locks to write the model.
    /// `progress(done, total)` is called after every sweep.
    pub fn train(
        &self,
        req: &TrainRequest,
        mut progress: impl FnMut(u32, u32),
    ) -> Result<ModelSummary> {
        let corpus = self.store.load_corpus(&req.corpus_id)?;
        let params = req.params();
        let mut sampler = GibbsSampler::new(&corpus, params)?;
        while !sampler.is_finished() {
            sampler.sweep();
            progress(sampler.sweeps_done(), params.iterations);
        }
        let model = sampler.finish();
        let log_likelihood = model.log_likelihood(&corpus)?;
        let _lock = self.lock_blocking()?;
        let model_id = self.store.put_model(&model)?;
        self.record(
            Action::Train,
            Some(corpus.corpus_id.clone()),
            Some(model_id.clone()),
            req,
        )?;
        Ok(ModelSummary {
            model_id,
            corpus_id: corpus.corpus_id,
            granularity: model.granularity,
            params,
            documents: model.num_docs(),
            vocabulary_size: model.vocab_len(),
            log_likelihood,
        })
    }

    pub fn topics(&self, model_id: &str, n: usize) -> Result<Vec<TopicWords>> {
        let model = self.store.load_model(model_id)?;
        Ok(topic_words(&model, n))
    }

    pub fn topic_query(
        &self,
        model_id: &str,
        words: &[String],
        top: usize,
    ) -> Result<TopicQueryResult> {
        let model = self.store.load_model(model_id)?;
        let ranking = retrieval::topic_query(&model, words, top)?;
        Ok(TopicQueryResult {
            query_words: ranking.query_words,
            ignored_words: ranking.ignored_words,
            topics: ranking
                .entries
                .iter()
                .map(|e| TopicHit {
                    topic: e.topic,
                    score: e.score,
                    top_words: model
                        .top_words(e.topic as usize, defaults::TOP_WORDS)
                        .into_iter()
                        .map(|(w, _)| w.to_owned())
                        .collect(),
                })
                .collect(),
        })
    }

    pub fn rank_docs(
        &self,
        model_id: &str,
        topics: &[u32],
        top: Option<usize>,
        threshold: Option<f64>,
    ) -> Result<RankDocsResult> {
        let model = self.store.load_model(model_id)?;
        let ranking = retrieval::rank_docs(&model, topics, top)?;
        let within_threshold = threshold.map(|t| {
            ranking
                .within(t)
                .into_iter()
                .map(|e| e.doc_id.clone())
                .collect()
        });
        Ok(RankDocsResult {
            ranking,
            threshold,
            within_threshold,
        })
    }

    /// Page ranking from a page-granularity model.
    pub fn rank_pages(
        &self,
        model_id: &str,
        topics: &[u32],
        top: Option<usize>,
    ) -> Result<DocRanking> {
        let model = self.store.load_model(model_id)?;
        if model.granularity != Granularity::Page {
            return Err(drilldown_core::RetrievalError::WrongGranularity {
                expected: Granularity::Page,
                actual: model.granularity,
            }
            .into());
        }
        Ok(retrieval::rank_docs(&model, topics, top)?)
    }

    pub fn rank_volumes(
        &self,
        model_id: &str,
        topics: &[u32],
        top_pages: usize,
        top_volumes: usize,
    ) -> Result<Vec<VolumeRow>> {
        let model = self.store.load_model(model_id)?;
        let ranking = retrieval::rank_docs(&model, topics, None)?;
        let hits = retrieval::rank_volumes_by_page_hits(&ranking, top_pages, top_volumes)?;
        let titles = self.titles().unwrap_or_default();
        Ok(hits
            .into_iter()
            .enumerate()
            .map(|(i, h)| VolumeRow {
                rank: i + 1,
                title: titles.get(&h.volume_id).cloned().unwrap_or_default(),
                volume_id: h.volume_id,
                pages: h.pages,
                best_distance: h.best_distance,
            })
            .collect())
    }

    fn titles(&self) -> Result<HashMap<String, String>> {
        Ok(self
            .volumes()?
            .into_iter()
            .map(|v| (v.volume_id, v.title))
            .collect())
    }

    pub fn similar_sentences(
        &self,
        model_id: &str,
        sentence: Option<&str>,
        text: Option<&str>,
        top: Option<usize>,
    ) -> Result<DocRanking> {
        let model = self.store.load_model(model_id)?;
        let query = match (sentence, text) {
            (Some(id), None) => SentenceQuery::Doc(id),
            (None, Some(t)) => SentenceQuery::Text(t),
            _ => {
                return Err(Error::Invalid(
                    "give exactly one of sentence id or text".into(),
                ))
            }
        };
        Ok(retrieval::similar_sentences(&model, query, top)?)
    }

    /// Keeps the documents of the model's corpus within `threshold` of the
    /// query topics.
    pub fn filter(&self, req: &FilterRequest) -> Result<CorpusSummary> {
        let _lock = self.store.lock()?;
        let model = self.store.load_model(&req.model_id)?;
        let corpus = self.store.load_corpus(&model.corpus_id)?;
        model.check_corpus(&corpus)?;
        let ranking = retrieval::rank_docs(&model, &req.topics, None)?;
        let keep = retrieval::filter_by_threshold(&ranking, req.threshold);
        if keep.is_empty() {
            return Err(Error::NothingRetained {
                threshold: req.threshold,
                closest: ranking
                    .entries
                    .first()
                    .map_or(f64::INFINITY, |e| e.distance),
            });
        }
        let child = drilldown_core::filter_corpus(&corpus, &keep)?;
        self.store.put_corpus(&child)?;
        self.record(
            Action::Filter,
            Some(child.corpus_id.clone()),
            Some(req.model_id.clone()),
            req,
        )?;
        Ok(CorpusSummary::from(&child))
    }

    pub fn drill(&self, req: &DrillRequest) -> Result<CorpusSummary> {
        let _lock = self.store.lock()?;
        let mut corpus = self.store.load_corpus(&req.corpus_id)?;
        if let Some(volumes) = &req.volumes {
            let wanted: BTreeSet<&str> = volumes.iter().map(String::as_str).collect();
            let keep: BTreeSet<String> = corpus
                .documents
                .iter()
                .filter(|d| wanted.contains(d.provenance.volume_id.as_str()))
                .map(|d| d.doc_id.clone())
                .collect();
            if keep.is_empty() {
                return Err(Error::Invalid(
                    "none of the requested volumes are in the corpus".into(),
                ));
            }
            corpus = drilldown_core::filter_corpus(&corpus, &keep)?;
            self.store.put_corpus(&corpus)?;
        }
        let child = drilldown_core::drill(&corpus, req.to, &self.volumes()?)?;
        self.store.put_corpus(&child)?;
        self.record(Action::Drill, Some(child.corpus_id.clone()), None, req)?;
        Ok(CorpusSummary::from(&child))
    }

    pub fn crosswalk(&self, basemap: &std::path::Path) -> Result<CrosswalkTable> {
        let map = overlay::read_basemap(basemap)?;
        let table = scimap::build_crosswalk(&map)?;
        for j in &table.skipped {
            tracing::warn!(journal = %j, "skipped journal with unparseable call number");
        }
        Ok(table)
    }

    /// Places every volume of `corpus_id` on the basemap.
    pub fn place(
        &self,
        basemap: &std::path::Path,
        corpus_id: &str,
        call_numbers: Option<&std::path::Path>,
        mode: PlacementMode,
    ) -> Result<Vec<BookPlacement>> {
        let map = overlay::read_basemap(basemap)?;
        let table = scimap::build_crosswalk(&map)?;
        let corpus = self.store.load_corpus(corpus_id)?;
        let resolver: Box<dyn CallNumberResolver> = match call_numbers {
            Some(p) => Box::new(TableResolver::read(p)?),
            None => Box::new(MetadataResolver),
        };
        let volumes = self.volumes()?;
        let config = PlacementConfig {
            mode,
            ..PlacementConfig::default()
        };
        let ids: BTreeSet<&str> = corpus.volume_ids().into_iter().collect();
        Ok(volumes
            .iter()
            .filter(|v| ids.contains(v.volume_id.as_str()))
            .map(|v| {
                let cn = overlay::resolved_call_number(resolver.as_ref(), v);
                scimap::place_book(&v.volume_id, cn.as_ref(), &table, &map, &config)
            })
            .collect())
    }

    /// Overlay with three emphasis tiers: volumes of `base`, those also in
    /// `mid`, and those also in `focus`.
    pub fn overlay(
        &self,
        basemap: &std::path::Path,
        base: &str,
        mid: Option<&str>,
        focus: Option<&str>,
        call_numbers: Option<&std::path::Path>,
    ) -> Result<OverlayFile> {
        let placements = self.place(basemap, base, call_numbers, PlacementMode::Weighted)?;
        let mut tiers = HashMap::new();
        for (id, tier) in [(mid, Tier::Mid), (focus, Tier::Focus)] {
            if let Some(id) = id {
                for v in self.store.load_corpus(id)?.volume_ids() {
                    tiers.insert(v.to_owned(), tier);
                }
            }
        }
        let titles = self.titles()?;
        Ok(overlay::build_overlay(
            &basemap.display().to_string(),
            &placements,
            &titles,
            &tiers,
        ))
    }

    /// Overlay for a corpus and its ancestry: the corpus is the focus tier,
    /// its parent the middle tier, and the ingest corpus the base.
    pub fn overlay_for(&self, basemap: &std::path::Path, corpus_id: &str) -> Result<OverlayFile> {
        let lineage = pipeline::corpus_lineage(&self.store, corpus_id)?;
        let base = lineage
            .last()
            .cloned()
            .unwrap_or_else(|| corpus_id.to_owned());
        let mid = (lineage.len() > 2).then(|| lineage[1].clone());
        let focus = (lineage.len() > 1).then(|| lineage[0].clone());
        self.overlay(basemap, &base, mid.as_deref(), focus.as_deref(), None)
    }

    pub fn export_annotations(
        &self,
        model_id: &str,
        topics: &[u32],
        top: usize,
        out_dir: &std::path::Path,
    ) -> Result<AnnotationManifest> {
        let ranking = self.rank_pages(model_id, topics, Some(top))?;
        let manifest =
            pipeline::export_annotation_manifest(model_id, &ranking, &self.volumes()?, out_dir)?;
        let _lock = self.lock_blocking()?;
        let params = serde_json::json!({
            "model_id": model_id,
            "topics": topics,
            "top": top,
            "out_dir": out_dir,
        });
        self.record(Action::Export, None, Some(model_id.to_owned()), &params)?;
        Ok(manifest)
    }

    /// Re-executes this store's pipeline log into `target` and reports, per
    /// stage, whether the reproduced corpus or model id matches.
    pub fn replay(&self, target: &Workspace) -> Result<Vec<ReplayStep>> {
        let state = self.store.load_pipeline()?;
        let mut models: HashMap<String, String> = HashMap::new();
        let mut corpora: HashMap<String, String> = HashMap::new();
        let mut steps = Vec::new();
        let de = |v: &serde_json::Value| Error::Invalid(format!("unreadable stage params: {v}"));
        for s in &state.stages {
            let (expected, reproduced) = match s.action {
                Action::Ingest => {
                    let req: IngestRequest =
                        serde_json::from_value(s.params.clone()).map_err(|_| de(&s.params))?;
                    let out = target.ingest(&req)?;
                    (s.corpus_id.clone(), Some(out.corpus_id))
                }
                Action::Train => {
                    let mut req: TrainRequest =
                        serde_json::from_value(s.params.clone()).map_err(|_| de(&s.params))?;
                    req.corpus_id = corpora
                        .get(&req.corpus_id)
                        .cloned()
                        .unwrap_or(req.corpus_id);
                    let out = target.train(&req, |_, _| {})?;
                    (s.model_id.clone(), Some(out.model_id))
                }
                Action::Filter => {
                    let mut req: FilterRequest =
                        serde_json::from_value(s.params.clone()).map_err(|_| de(&s.params))?;
                    req.model_id = models.get(&req.model_id).cloned().unwrap_or(req.model_id);
                    let out = target.filter(&req)?;
                    (s.corpus_id.clone(), Some(out.corpus_id))
                }
                Action::Drill => {
                    let mut req: DrillRequest =
                        serde_json::from_value(s.params.clone()).map_err(|_| de(&s.params))?;
                    req.corpus_id = corpora
                        .get(&req.corpus_id)
                        .cloned()
                        .unwrap_or(req.corpus_id);
                    let out = target.drill(&req)?;
                    (s.corpus_id.clone(), Some(out.corpus_id))
                }
                Action::Export => continue,
            };
            if let (Some(e), Some(r)) = (&expected, &reproduced) {
                match s.action {
                    Action::Train => models.insert(e.clone(), r.clone()),
                    _ => corpora.insert(e.clone(), r.clone()),
                };
            }
            steps.push(ReplayStep {
                stage: s.stage,
                action: s.action,
                expected,
                reproduced,
            });
        }
        Ok(steps)
    }
}

pub fn topic_words(model: &LdaModel, n: usize) -> Vec<TopicWords> {
    (0..model.k())
        .map(|t| TopicWords {
            topic: t as u32,
            words: model
                .top_words(t, n)
                .into_iter()
                .map(|(w, p)| WordProb {
                    word: w.to_owned(),
                    prob: p,
                })
                .collect(),
        })
        .collect()
}
