//! Local JSON/HTTP service driving the interactive workflow.
//!
//! Requests within one session are serialized by a per-session lock;
//! different sessions proceed concurrently.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use base64::Engine as _;
use rand::RngCore;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;

use super::error_body;
use super::session::{ParamsPatch, Session};
use crate::raster::SliceMeta;
use crate::spine::{LinearSvmModel, SpineCenter};
use crate::store::{MuscleLabel, RecordStore, TrainingPhase};
use crate::Error;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
    store: Arc<Mutex<RecordStore>>,
    model: Option<Arc<LinearSvmModel>>,
}

impl AppState {
    pub fn new(store: RecordStore, model: Option<LinearSvmModel>) -> Self {
        Self {
            sessions: Arc::default(),
            store: Arc::new(Mutex::new(store)),
            model: model.map(Arc::new),
        }
    }

    /// Open `results.csv` under `data_dir`.
    pub fn with_data_dir(data_dir: &std::path::Path, model: Option<LinearSvmModel>) -> crate::Result<Self> {
        std::fs::create_dir_all(data_dir)?;
        Ok(Self::new(RecordStore::open(data_dir.join("results.csv"))?, model))
    }

    pub fn store(&self) -> Arc<Mutex<RecordStore>> {
        self.store.clone()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn not_found(id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            body: json!({ "error": "unknown_session", "message": format!("no session {id}") }),
        }
    }
}

pub fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::Workflow(_) | Error::Duplicate(_) => StatusCode::CONFLICT,
        Error::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        Self {
            status: status_for(&err),
            body: error_body(&err),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

/// Empty bodies read as `{}` so optional-only payloads may be omitted.
fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let text: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(text)
        .map_err(|e| Error::Validation(format!("bad request body: {e}")).into())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenRequest {
    /// Base64-encoded PNG.
    image_png: String,
    meta: SliceMeta,
}

async fn open_session(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: OpenRequest = parse(&body)?;
    let png = base64::engine::general_purpose::STANDARD
        .decode(req.image_png.trim())
        .map_err(|e| Error::Decode(format!("image_png is not base64: {e}")))?;
    let session = Session::open(&png, req.meta)?;
    let mut raw = [0u8; 8];
    rand::rng().fill_bytes(&mut raw);
    let id = hex::encode(raw);
    let mut out = to_value(&session.info());
    out["session_id"] = json!(id);
    out["params"] = to_value(&session.params_state());
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(Json(out))
}

#[derive(Deserialize)]
struct Point {
    x: i64,
    y: i64,
}

async fn add_anchor(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let p: Point = parse(&body)?;
    let session = state.session(&id)?;
    let mut s = session.lock().await;
    let path = s.add_anchor(p.x, p.y)?;
    Ok(Json(json!({ "anchors": s.anchor_count(), "path": path })))
}

async fn preview(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<Point>, QueryRejection>,
) -> ApiResult {
    let Query(p) = query.map_err(|e| Error::Validation(format!("bad query: {e}")))?;
    let session = state.session(&id)?;
    let s = session.lock().await;
    Ok(Json(json!({ "path": s.preview(p.x, p.y)? })))
}

async fn close(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = state.session(&id)?;
    let mut s = session.lock().await;
    let stats = s.close()?;
    let mut out = to_value(&stats);
    out["params"] = to_value(&s.params_state());
    Ok(Json(out))
}

async fn patch_params(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: ParamsPatch = parse(&body)?;
    let session = state.session(&id)?;
    let mut s = session.lock().await;
    let params = s.patch_params(&req)?;
    let mut out = json!({ "params": params });
    if req.brightness.is_some() {
        out["rendering_png"] = json!(s.rendering_base64()?);
    }
    Ok(Json(out))
}

fn quant_json(q: &crate::quantify::QuantResult) -> Value {
    let mut v = to_value(q);
    v["rounded"] = json!({
        "fat_percent": q.fat_percent_rounded(),
        "tcsa_mm2": q.tcsa_rounded(),
        "fcsa_mm2": q.fcsa_rounded(),
    });
    v
}

async fn compute(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = state.session(&id)?;
    let s = session.lock().await;
    Ok(Json(quant_json(&s.compute()?)))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SegmentRequest {
    label: Option<MuscleLabel>,
    center: Option<[f64; 2]>,
}

async fn segment(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: SegmentRequest = parse(&body)?;
    let session = state.session(&id)?;
    let mut s = session.lock().await;
    let manual = req.center.map(|[x, y]| SpineCenter::manual(x, y));
    let out = s.segment(req.label, manual, state.model.as_deref())?;
    Ok(Json(json!({
        "spine_center": out.center,
        "fragments": out.fragments.to_json(),
    })))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExportRequest {
    label: Option<MuscleLabel>,
    #[serde(default)]
    phase: TrainingPhase,
}

async fn export(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: ExportRequest = parse(&body)?;
    let session = state.session(&id)?;
    let mut s = session.lock().await;
    let mut store = state.store.lock().await;
    let out = s.export(&mut store, req.label, req.phase)?;
    Ok(Json(to_value(&out)))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(open_session))
        .route("/sessions/{id}/anchors", post(add_anchor))
        .route("/sessions/{id}/preview", get(preview))
        .route("/sessions/{id}/close", post(close))
        .route("/sessions/{id}/params", patch(patch_params))
        .route("/sessions/{id}/compute", post(compute))
        .route("/sessions/{id}/segment", post(segment))
        .route("/sessions/{id}/export", post(export))
        .with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub model: Option<PathBuf>,
}

/// Bind on localhost and serve until the process is stopped.
pub async fn serve(config: ServeConfig) -> crate::Result<()> {
    let model = config.model.as_deref().map(LinearSvmModel::load).transpose()?;
    let state = AppState::with_data_dir(&config.data_dir, model)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
