//! HTTP/JSON service over the gaitlab operations.
//!
//! Every endpoint is a `POST` under `/v1` taking and returning JSON, except
//! `GET /health`. Heavy work runs on the blocking pool. Galleries are opened
//! once per server and shared: adds take the write lock, queries rank a
//! snapshot taken under the read lock.

pub mod ops;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Json, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use gaitlab_core::api::*;
use gaitlab_core::gallery::{model_fingerprint, query_incidents, AcceptanceRule, Gallery, LocationTrace};
use gaitlab_core::model::FeatureModel;
use gaitlab_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio::net::TcpListener;

/// Core error carried to an HTTP response.
#[derive(Debug)]
pub struct ServiceError(pub Error);

impl From<Error> for ServiceError {
    fn from(e: Error) -> Self {
        ServiceError(e)
    }
}

pub fn error_kind(e: &Error) -> (&'static str, StatusCode) {
    use Error::*;
    match e {
        Parse { .. } => ("parse", StatusCode::BAD_REQUEST),
        Schema { .. } => ("schema", StatusCode::BAD_REQUEST),
        InvalidSample(_) => ("invalid_sample", StatusCode::BAD_REQUEST),
        Parameter(_) => ("parameter", StatusCode::BAD_REQUEST),
        Configuration(_) => ("configuration", StatusCode::BAD_REQUEST),
        UnknownJoint(_) => ("unknown_joint", StatusCode::BAD_REQUEST),
        InvalidSplit(_) => ("invalid_split", StatusCode::BAD_REQUEST),
        Shape { .. } => ("shape", StatusCode::BAD_REQUEST),
        Json(_) => ("json", StatusCode::BAD_REQUEST),
        EmptyDataset => ("empty_dataset", StatusCode::UNPROCESSABLE_ENTITY),
        DegenerateWalk => ("degenerate_walk", StatusCode::UNPROCESSABLE_ENTITY),
        DegenerateGeometry { .. } => ("degenerate_geometry", StatusCode::UNPROCESSABLE_ENTITY),
        InsufficientClasses(_) => ("insufficient_classes", StatusCode::UNPROCESSABLE_ENTITY),
        DegenerateModel(_) => ("degenerate_model", StatusCode::UNPROCESSABLE_ENTITY),
        CoincidentCentroids(..) => ("coincident_centroids", StatusCode::UNPROCESSABLE_ENTITY),
        UndefinedMetric(_) => ("undefined_metric", StatusCode::UNPROCESSABLE_ENTITY),
        UndefinedScore(_) => ("undefined_score", StatusCode::UNPROCESSABLE_ENTITY),
        EmptyGallery => ("empty_gallery", StatusCode::UNPROCESSABLE_ENTITY),
        CorruptGallery(_) => ("corrupt_gallery", StatusCode::INTERNAL_SERVER_ERROR),
        Io(io) if io.kind() == std::io::ErrorKind::NotFound => ("not_found", StatusCode::NOT_FOUND),
        Io(_) => ("io", StatusCode::INTERNAL_SERVER_ERROR),
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (kind, status) = error_kind(&self.0);
        let body = ApiError {
            kind: kind.into(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<RwLock<Gallery>>;

#[derive(Debug, Default)]
pub struct AppState {
    galleries: Mutex<HashMap<PathBuf, Shared>>,
}

impl AppState {
    fn gallery(&self, path: &Path, model: &FeatureModel) -> Result<Shared, Error> {
        let key = std::path::absolute(path)?;
        let mut map = self.galleries.lock().expect("gallery registry poisoned");
        if let Some(g) = map.get(&key) {
            let fp = model_fingerprint(model)?;
            if g.read().expect("gallery lock poisoned").model_id() != fp {
                return Err(Error::Configuration(format!(
                    "gallery {} was built with a different model",
                    path.display()
                )));
            }
            return Ok(g.clone());
        }
        let g = Arc::new(RwLock::new(Gallery::open_for(&key, model)?));
        map.insert(key, g.clone());
        Ok(g)
    }

    pub fn gallery_add(&self, req: GalleryAddRequest) -> Result<GalleryAddResponse, Error> {
        let model = FeatureModel::load(&req.model)?;
        let samples = ops::load_samples(&req.sample)?;
        let templates = samples.iter().map(|s| model.template(s)).collect::<Result<Vec<_>, _>>()?;
        let shared = self.gallery(&req.gallery, &model)?;
        let mut g = shared.write().expect("gallery lock poisoned");
        let mut ids = Vec::with_capacity(templates.len());
        for t in templates {
            ids.push(g.add_incident(t, req.timestamp, req.lat, req.lon, &req.camera)?);
        }
        Ok(GalleryAddResponse { ids, size: g.len() })
    }

    pub fn gallery_query(&self, req: GalleryQueryRequest) -> Result<LocationTrace, Error> {
        let model = FeatureModel::load(&req.model)?;
        let rule: AcceptanceRule = req.rule.parse()?;
        let shared = self.gallery(&req.gallery, &model)?;
        let snapshot = shared.read().expect("gallery lock poisoned").incidents().to_vec();
        let (query, exclude) = match (&req.sample, req.incident) {
            (Some(path), None) => {
                let samples = ops::load_samples(path)?;
                let s = samples.get(req.index).ok_or_else(|| {
                    Error::Parameter(format!("sample index {} out of range ({} samples)", req.index, samples.len()))
                })?;
                (model.template(s)?, None)
            }
            (None, Some(id)) => {
                let inc = snapshot
                    .iter()
                    .find(|i| i.id == id)
                    .ok_or_else(|| Error::Parameter(format!("no incident with id {id}")))?;
                (inc.template.clone(), Some(id))
            }
            _ => return Err(Error::Parameter("give exactly one of a sample file or an incident id".into())),
        };
        let trace = query_incidents(&snapshot, &model, &query, exclude, &rule)?;
        if let Some(out) = &req.out {
            std::fs::write(out, trace.to_json()?)?;
        }
        Ok(trace)
    }
}

async fn blocking<Req, Resp>(
    state: Arc<AppState>,
    req: Req,
    f: fn(&AppState, Req) -> Result<Resp, Error>,
) -> Result<Json<Resp>, ServiceError>
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
{
    let out = tokio::task::spawn_blocking(move || f(&state, req))
        .await
        .map_err(|e| ServiceError(Error::Io(std::io::Error::other(e.to_string()))))?;
    Ok(Json(out?))
}

macro_rules! endpoint {
    ($name:ident, $req:ty, $resp:ty, $body:expr) => {
        async fn $name(State(state): State<Arc<AppState>>, Json(req): Json<$req>) -> Result<Json<$resp>, ServiceError> {
            tracing::debug!(endpoint = stringify!($name), "request");
            blocking(state, req, $body).await
        }
    };
}

endpoint!(synth, SynthRequest, DatasetInfo, |_, r| ops::synth(r));
endpoint!(ingest, IngestRequest, DatasetInfo, |_, r| ops::ingest(r));
endpoint!(corrupt, CorruptRequest, CorruptResponse, |_, r| ops::corrupt(r));
endpoint!(fit, FitRequest, ModelInfo, |_, r| ops::fit(r));
endpoint!(eval, EvalRequest, EvalResponse, |_, r| ops::eval(r));
endpoint!(cluster, ClusterRequest, ClusterResponse, |_, r| ops::cluster(r));
endpoint!(sweep, SweepRequest, ReportResponse, |_, r| ops::sweep(r));
endpoint!(robust, RobustRequest, ReportResponse, |_, r| ops::robust(r));
endpoint!(clusterability, ClusterabilityRequest, ReportResponse, |_, r| ops::clusterability(r));
endpoint!(calibrate, CalibrateRequest, CalibrateResponse, |_, r| ops::calibrate(r));
endpoint!(gallery_add, GalleryAddRequest, GalleryAddResponse, AppState::gallery_add);
endpoint!(gallery_query, GalleryQueryRequest, LocationTrace, AppState::gallery_query);

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/synth", post(synth))
        .route("/ingest", post(ingest))
        .route("/corrupt", post(corrupt))
        .route("/fit", post(fit))
        .route("/eval", post(eval))
        .route("/cluster", post(cluster))
        .route("/sweep", post(sweep))
        .route("/robust", post(robust))
        .route("/clusterability", post(clusterability))
        .route("/calibrate", post(calibrate))
        .route("/gallery/add", post(gallery_add))
        .route("/gallery/query", post(gallery_query));
    Router::new()
        .route("/health", get(health))
        .nest(API_PREFIX, api)
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(AppState::default()))).await
}

/// Binds `addr` and serves in a background task; returns the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener).await {
            tracing::error!(error = %e, "server stopped");
        }
    });
    Ok(local)
}
