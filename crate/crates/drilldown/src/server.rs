//! HTTP/JSON API. Successful responses are `{"api_version": 1, "result": …}`
//! where `result` is the serialized `Workspace` output; failures are
//! `{"error": name, "detail": message}` with 404, 409 or 422.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::error::{Error, Result};
use crate::service::{
    defaults, DrillRequest, FilterRequest, IngestRequest, TrainRequest, Workspace,
};

pub const API_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    /// Basemap for `GET /overlay` when the request names none.
    pub basemap: Option<PathBuf>,
    pub parallel_jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Train,
    Drill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub done: u32,
    pub total: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobError {
    pub error: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub progress: Progress,
    pub result_id: Option<String>,
    pub error: Option<JobError>,
}

#[derive(Default)]
struct Jobs {
    next: u64,
    by_id: HashMap<String, Job>,
}

#[derive(Clone)]
pub struct AppState {
    ws: Workspace,
    basemap: Option<PathBuf>,
    jobs: Arc<Mutex<Jobs>>,
    slots: Arc<Semaphore>,
}

impl AppState {
    pub fn new(ws: Workspace, basemap: Option<PathBuf>, parallel_jobs: usize) -> Self {
        Self {
            ws,
            basemap,
            jobs: Arc::default(),
            slots: Arc::new(Semaphore::new(parallel_jobs.max(1))),
        }
    }

    fn new_job(&self, kind: JobKind, total: u32) -> Job {
        let mut jobs = self.jobs.lock().expect("job table");
        jobs.next += 1;
        let job = Job {
            job_id: format!("j{:06}", jobs.next),
            kind,
            status: JobStatus::Queued,
            progress: Progress { done: 0, total },
            result_id: None,
            error: None,
        };
        jobs.by_id.insert(job.job_id.clone(), job.clone());
        job
    }

    fn update(&self, id: &str, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.lock().expect("job table").by_id.get_mut(id) {
            f(job);
        }
    }

    pub fn job(&self, id: &str) -> Option<Job> {
        self.jobs.lock().expect("job table").by_id.get(id).cloned()
    }

    /// Queues `work` behind the job slots and records its outcome.
    fn spawn_job(
        &self,
        job: &Job,
        work: impl FnOnce(&Workspace, &dyn Fn(u32, u32)) -> Result<String> + Send + 'static,
    ) {
        let state = self.clone();
        let id = job.job_id.clone();
        tokio::spawn(async move {
            let Ok(_permit) = state.slots.clone().acquire_owned().await else {
                return;
            };
            state.update(&id, |j| j.status = JobStatus::Running);
            let worker = state.clone();
            let job_id = id.clone();
            let outcome = tokio::task::spawn_blocking(move || {
                let progress = |done: u32, total: u32| {
                    worker.update(&job_id, |j| j.progress = Progress { done, total });
                };
                work(&worker.ws, &progress)
            })
            .await;
            state.update(&id, |j| match outcome {
                Ok(Ok(result_id)) => {
                    j.status = JobStatus::Done;
                    j.result_id = Some(result_id);
                }
                Ok(Err(e)) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(JobError {
                        error: e.name().into(),
                        detail: e.to_string(),
                    });
                }
                Err(e) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(JobError {
                        error: "JobPanicked".into(),
                        detail: e.to_string(),
                    });
                }
            });
        });
    }
}

#[derive(Serialize)]
struct Envelope<T> {
    api_version: u32,
    result: T,
}

struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::UNPROCESSABLE_ENTITY);
        let body = serde_json::json!({ "error": self.0.name(), "detail": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

type ApiResult = std::result::Result<Response, ApiError>;

fn ok<T: Serialize>(status: StatusCode, result: T) -> ApiResult {
    Ok((
        status,
        Json(Envelope {
            api_version: API_VERSION,
            result,
        }),
    )
        .into_response())
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| Error::Invalid(e.to_string()))
}

async fn blocking<T: Send + 'static>(
    state: &AppState,
    f: impl FnOnce(&Workspace) -> Result<T> + Send + 'static,
) -> Result<T> {
    let ws = state.ws.clone();
    tokio::task::spawn_blocking(move || f(&ws))
        .await
        .map_err(|e| Error::Invalid(format!("worker failed: {e}")))?
}

async fn ingest(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let mut req: IngestRequest = parse(&body)?;
    if req.collection.is_relative() {
        req.collection = state.ws.store().root().join(&req.collection);
    }
    let summary = blocking(&state, move |ws| ws.ingest(&req)).await?;
    ok(StatusCode::CREATED, summary)
}

async fn corpus(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    ok(
        StatusCode::OK,
        blocking(&state, move |ws| ws.corpus_summary(&id)).await?,
    )
}

async fn train(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: TrainRequest = parse(&body)?;
    req.params().validate().map_err(Error::from)?;
    if !state.ws.store().has_corpus(&req.corpus_id) {
        return Err(Error::NotFound {
            kind: "corpus",
            id: req.corpus_id,
        }
        .into());
    }
    let job = state.new_job(JobKind::Train, req.iterations);
    state.spawn_job(&job, move |ws, progress| {
        ws.train(&req, progress).map(|m| m.model_id)
    });
    ok(StatusCode::ACCEPTED, job)
}

async fn job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    match state.job(&id) {
        Some(job) => ok(StatusCode::OK, job),
        None => Err(Error::NotFound { kind: "job", id }.into()),
    }
}

#[derive(Deserialize)]
struct TopicsParams {
    n: Option<usize>,
}

async fn topics(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TopicsParams>,
) -> ApiResult {
    let n = q.n.unwrap_or(defaults::TOP_WORDS);
    ok(
        StatusCode::OK,
        blocking(&state, move |ws| ws.topics(&id, n)).await?,
    )
}

#[derive(Deserialize)]
struct TopicQueryBody {
    words: Vec<String>,
    #[serde(default = "ten")]
    top: usize,
}

fn ten() -> usize {
    10
}

async fn topic_query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let b: TopicQueryBody = parse(&body)?;
    ok(
        StatusCode::OK,
        blocking(&state, move |ws| ws.topic_query(&id, &b.words, b.top)).await?,
    )
}

#[derive(Deserialize)]
struct RankDocsBody {
    topics: Vec<u32>,
    #[serde(default)]
    top: Option<usize>,
    #[serde(default)]
    threshold: Option<f64>,
}

async fn rank_docs(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let b: RankDocsBody = parse(&body)?;
    ok(
        StatusCode::OK,
        blocking(&state, move |ws| {
            ws.rank_docs(&id, &b.topics, b.top, b.threshold)
        })
        .await?,
    )
}

#[derive(Deserialize)]
struct SimilarBody {
    #[serde(default)]
    sentence: Option<String>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default = "ten")]
    top: usize,
}

async fn similar_sentences(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let b: SimilarBody = parse(&body)?;
    let r = blocking(&state, move |ws| {
        ws.similar_sentences(&id, b.sentence.as_deref(), b.text.as_deref(), Some(b.top))
    })
    .await?;
    ok(StatusCode::OK, r)
}

async fn filter(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: FilterRequest = parse(&body)?;
    ok(
        StatusCode::CREATED,
        blocking(&state, move |ws| ws.filter(&req)).await?,
    )
}

#[derive(Deserialize)]
struct DrillParams {
    #[serde(default, rename = "async")]
    background: bool,
}

/// Synchronous by default; `?async=true` runs it as a drill job.
async fn drill(
    State(state): State<AppState>,
    Query(q): Query<DrillParams>,
    body: Bytes,
) -> ApiResult {
    let req: DrillRequest = parse(&body)?;
    if q.background {
        let job = state.new_job(JobKind::Drill, 1);
        state.spawn_job(&job, move |ws, progress| {
            let out = ws.drill(&req)?;
            progress(1, 1);
            Ok(out.corpus_id)
        });
        return ok(StatusCode::ACCEPTED, job);
    }
    ok(
        StatusCode::CREATED,
        blocking(&state, move |ws| ws.drill(&req)).await?,
    )
}

#[derive(Deserialize)]
struct OverlayParams {
    corpus: String,
    #[serde(default)]
    basemap: Option<PathBuf>,
}

async fn overlay(State(state): State<AppState>, Query(q): Query<OverlayParams>) -> ApiResult {
    let basemap = q
        .basemap
        .or_else(|| state.basemap.clone())
        .ok_or_else(|| Error::Invalid("no basemap configured".into()))?;
    ok(
        StatusCode::OK,
        blocking(&state, move |ws| ws.overlay_for(&basemap, &q.corpus)).await?,
    )
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/corpora", post(ingest))
        .route("/corpora/{id}", get(corpus))
        .route("/models", post(train))
        .route("/jobs/{id}", get(job))
        .route("/models/{id}/topics", get(topics))
        .route("/models/{id}/topic-query", post(topic_query))
        .route("/models/{id}/rank-docs", post(rank_docs))
        .route("/models/{id}/similar-sentences", post(similar_sentences))
        .route("/pipeline/filter", post(filter))
        .route("/pipeline/drill", post(drill))
        .route("/overlay", get(overlay))
        .with_state(state)
}

pub async fn serve(ws: Workspace, config: ServerConfig) -> Result<()> {
    let app = router(AppState::new(ws, config.basemap, config.parallel_jobs));
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|e| Error::io(config.bind.to_string(), e))?;
    tracing::info!(addr = %config.bind, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(config.bind.to_string(), e))
}
