//! In-process requests against the router, and the server/CLI parity sweep.

use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use drilldown::service::Workspace;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<&str>,
) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(
            body.map(|b| Body::from(b.to_owned()))
                .unwrap_or_else(Body::empty),
        )
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()))
    };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, "GET", uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(&body.to_string())).await
}

/// Polls a job until it leaves the queue, returning the final job object.
pub async fn wait_job(app: &Router, job_id: &str) -> Value {
    for _ in 0..6000 {
        let (status, body) = get(app, &format!("/jobs/{job_id}")).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        let job = body["result"].clone();
        if job["status"] == "done" || job["status"] == "failed" {
            return job;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job {job_id} did not finish");
}

/// Ids produced by [`prepare`].
pub struct Prepared {
    pub corpus: String,
    pub model: String,
    pub pages: String,
    pub sentence_model: String,
    pub first_sentence: String,
}

/// Ingests the fixture, trains a volume model through the job API, and builds
/// a sentence model over v00 with the library.
pub async fn prepare(app: &Router, ws: &Workspace, collection: &Path) -> Prepared {
    let (status, body) = post(app, "/corpora", json!({ "collection": collection })).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let corpus = body["result"]["corpus_id"].as_str().unwrap().to_owned();

    let (status, body) = post(
        app,
        "/models",
        json!({"corpus_id": corpus, "k": 6, "iterations": 120}),
    )
    .await;
    assert_eq!(status, StatusCode::ACCEPTED, "{body}");
    let job = wait_job(app, body["result"]["job_id"].as_str().unwrap()).await;
    assert_eq!(job["status"], "done", "{job}");
    let model = job["result_id"].as_str().unwrap().to_owned();

    let (status, body) = post(
        app,
        "/pipeline/drill",
        json!({"corpus_id": corpus, "to": "sentence", "volumes": ["v00"]}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let sentences = body["result"]["corpus_id"].as_str().unwrap().to_owned();
    let req = drilldown::service::TrainRequest {
        k: 3,
        iterations: 60,
        ..drilldown::service::TrainRequest::new(&sentences)
    };
    let sentence_model = ws.train(&req, |_, _| {}).unwrap().model_id;
    let first_sentence = ws.corpus(&sentences).unwrap().documents[0].doc_id.clone();

    let (status, body) = post(
        app,
        "/pipeline/drill",
        json!({"corpus_id": corpus, "to": "page"}),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    let pages = body["result"]["corpus_id"].as_str().unwrap().to_owned();

    Prepared {
        corpus,
        model,
        pages,
        sentence_model,
        first_sentence,
    }
}

/// Every read endpoint next to the CLI (or library) call that answers the
/// same question. Returns `(endpoint, server result, cli result)`.
pub async fn parity(
    app: &Router,
    ws: &Workspace,
    store: &Path,
    ids: &Prepared,
) -> Vec<(String, Value, Value)> {
    let cli = |args: &[&str]| super::json(&super::run_cli(store, args).unwrap());
    let basemap = super::basemap();
    let basemap = basemap.to_str().unwrap();
    let m = ids.model.as_str();
    let sm = ids.sentence_model.as_str();
    let mut out = Vec::new();

    let (_, s) = get(app, &format!("/corpora/{}", ids.corpus)).await;
    out.push((
        "GET /corpora/{id}".into(),
        s["result"].clone(),
        serde_json::to_value(ws.corpus_summary(&ids.corpus).unwrap()).unwrap(),
    ));

    let (_, s) = get(app, &format!("/models/{m}/topics?n=10")).await;
    out.push((
        "GET /models/{id}/topics".into(),
        s["result"].clone(),
        cli(&["topics", "--model", m, "--n", "10"]),
    ));

    let (_, s) = post(
        app,
        &format!("/models/{m}/topic-query"),
        json!({"words": ["evolution", "instinct", "zebra"], "top": 4}),
    )
    .await;
    out.push((
        "POST /models/{id}/topic-query".into(),
        s["result"].clone(),
        cli(&[
            "topic-query",
            "--model",
            m,
            "--words",
            "evolution,instinct,zebra",
            "--top",
            "4",
        ]),
    ));

    let (_, s) = post(
        app,
        &format!("/models/{m}/rank-docs"),
        json!({"topics": [0, 2, 4], "threshold": 1.8}),
    )
    .await;
    out.push((
        "POST /models/{id}/rank-docs".into(),
        s["result"].clone(),
        cli(&[
            "rank-docs",
            "--model",
            m,
            "--topics",
            "0,2,4",
            "--threshold",
            "1.8",
        ]),
    ));

    let (_, s) = post(
        app,
        &format!("/models/{sm}/similar-sentences"),
        json!({"sentence": ids.first_sentence, "top": 5}),
    )
    .await;
    out.push((
        "POST /models/{id}/similar-sentences (id)".into(),
        s["result"].clone(),
        cli(&[
            "similar-sentences",
            "--model",
            sm,
            "--sentence",
            &ids.first_sentence,
            "--top",
            "5",
        ]),
    ));

    let text = "consciousness and feeling of animals";
    let (_, s) = post(
        app,
        &format!("/models/{sm}/similar-sentences"),
        json!({"text": text, "top": 5}),
    )
    .await;
    out.push((
        "POST /models/{id}/similar-sentences (text)".into(),
        s["result"].clone(),
        cli(&[
            "similar-sentences",
            "--model",
            sm,
            "--text",
            text,
            "--top",
            "5",
        ]),
    ));

    let (_, s) = get(
        app,
        &format!("/overlay?corpus={}&basemap={basemap}", ids.pages),
    )
    .await;
    out.push((
        "GET /overlay".into(),
        s["result"].clone(),
        cli(&[
            "export-overlay",
            "--basemap",
            basemap,
            "--corpus",
            &ids.pages,
        ]),
    ));
    out
}
