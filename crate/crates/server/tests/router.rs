use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use gaitlab_core::api::*;
use gaitlab_server::{router, AppState};
use http_body_util::BodyExt;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower::ServiceExt;

async fn call(method: &str, uri: &str, body: Body) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body)
        .unwrap();
    let resp = router(Arc::new(AppState::default())).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn post<Req: Serialize, Resp: DeserializeOwned>(uri: &str, req: &Req) -> Result<Resp, (StatusCode, ApiError)> {
    let (status, bytes) = call("POST", uri, Body::from(serde_json::to_vec(req).unwrap())).await;
    if status.is_success() {
        Ok(serde_json::from_slice(&bytes).unwrap())
    } else {
        Err((status, serde_json::from_slice(&bytes).unwrap()))
    }
}

#[tokio::test]
async fn health_reports_ok() {
    let (status, bytes) = call("GET", "/health", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let h: Health = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(h.status, "ok");
}

#[tokio::test]
async fn synth_fit_eval_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    let info: DatasetInfo = post(
        "/v1/synth",
        &SynthRequest { ids: 8, per_id: 5, seed: 3, out: data.clone() },
    )
    .await
    .unwrap();
    assert_eq!((info.classes, info.samples), (8, 40));

    let model = dir.path().join("m.json");
    let params = FitParams { frames: 8, ..FitParams::default() };
    let m: ModelInfo = post(
        "/v1/fit",
        &FitRequest { method: "mmc".into(), learn: data.clone(), out: model.clone(), params },
    )
    .await
    .unwrap();
    assert_eq!(m.input_dim, 3 * 31 * 8);
    assert!(m.output_dim >= 1);

    let e: EvalResponse = post(
        "/v1/eval",
        &EvalRequest { model: ModelSource::File(model), eval: data, metrics: vec!["roc".into(), "pr".into()] },
    )
    .await
    .unwrap();
    assert_eq!(e.metrics.keys().collect::<Vec<_>>(), ["pr", "roc"]);
    assert!(e.metrics["roc"] > 0.9);
    assert_eq!(e.positive_pairs + e.negative_pairs, 40 * 39 / 2);
}

#[tokio::test]
async fn errors_map_to_status_and_kind() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.txt");
    let (status, err) = post::<_, ModelInfo>(
        "/v1/fit",
        &FitRequest { method: "mmc".into(), learn: missing.clone(), out: dir.path().join("m"), params: FitParams::default() },
    )
    .await
    .unwrap_err();
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err.kind, "not_found");
    assert!(err.message.contains("absent.txt"));

    let data = dir.path().join("d.txt");
    post::<_, DatasetInfo>("/v1/synth", &SynthRequest { ids: 3, per_id: 2, seed: 1, out: data.clone() })
        .await
        .unwrap();
    let (status, err) = post::<_, ModelInfo>(
        "/v1/fit",
        &FitRequest { method: "nope".into(), learn: data, out: dir.path().join("m"), params: FitParams::default() },
    )
    .await
    .unwrap_err();
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err.kind, "parameter");

    let (status, _) = call("POST", "/v1/fit", Body::from("{not json")).await;
    assert!(status.is_client_error());
}
