//! Thin async client for the gaitlab HTTP service.

use gaitlab_core::api::*;
use gaitlab_core::gallery::LocationTrace;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error body.
    #[error("{kind}: {message} (HTTP {status})")]
    Api { status: u16, kind: String, message: String },
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8750`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        let (kind, message) = match serde_json::from_str::<ApiError>(&text) {
            Ok(e) => (e.kind, e.message),
            Err(_) => ("http".to_string(), text),
        };
        Err(ClientError::Api {
            status: status.as_u16(),
            kind,
            message,
        })
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, req: &Req) -> Result<Resp> {
        let url = format!("{}{API_PREFIX}{path}", self.base);
        Self::decode(self.http.post(url).json(req).send().await?).await
    }

    pub async fn health(&self) -> Result<Health> {
        Self::decode(self.http.get(format!("{}/health", self.base)).send().await?).await
    }

    pub async fn synth(&self, req: &SynthRequest) -> Result<DatasetInfo> {
        self.post("/synth", req).await
    }

    pub async fn ingest(&self, req: &IngestRequest) -> Result<DatasetInfo> {
        self.post("/ingest", req).await
    }

    pub async fn corrupt(&self, req: &CorruptRequest) -> Result<CorruptResponse> {
        self.post("/corrupt", req).await
    }

    pub async fn fit(&self, req: &FitRequest) -> Result<ModelInfo> {
        self.post("/fit", req).await
    }

    pub async fn eval(&self, req: &EvalRequest) -> Result<EvalResponse> {
        self.post("/eval", req).await
    }

    pub async fn cluster(&self, req: &ClusterRequest) -> Result<ClusterResponse> {
        self.post("/cluster", req).await
    }

    pub async fn sweep(&self, req: &SweepRequest) -> Result<ReportResponse> {
        self.post("/sweep", req).await
    }

    pub async fn robust(&self, req: &RobustRequest) -> Result<ReportResponse> {
        self.post("/robust", req).await
    }

    pub async fn clusterability(&self, req: &ClusterabilityRequest) -> Result<ReportResponse> {
        self.post("/clusterability", req).await
    }

    pub async fn calibrate(&self, req: &CalibrateRequest) -> Result<CalibrateResponse> {
        self.post("/calibrate", req).await
    }

    pub async fn gallery_add(&self, req: &GalleryAddRequest) -> Result<GalleryAddResponse> {
        self.post("/gallery/add", req).await
    }

    pub async fn gallery_query(&self, req: &GalleryQueryRequest) -> Result<LocationTrace> {
        self.post("/gallery/query", req).await
    }
}
