//! HTTP/JSON API over exploration sessions.
//!
//! Mutating requests on one session are serialized; a second one arriving
//! while the first runs gets 409. Reads share the session lock.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use rulelens::ingest::ModelFormat;
use rulelens::reorder::Direction;
use rulelens::session::{OrderRequest, Predicate, Session};
use rulelens::{Analysis, Error, ReduceOptions};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(3600);

/// An error rendered as `{"error": ..., "location": ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub location: Option<serde_json::Value>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into(), location: None }
    }
}

pub fn status_of(error: &Error) -> StatusCode {
    match error {
        Error::Io { .. } | Error::Parse { .. } | Error::InconsistentPath { .. } => StatusCode::BAD_REQUEST,
        Error::Mismatch { .. }
        | Error::InvalidSchema(_)
        | Error::InvalidModel(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidArgument(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Error::NotFound(_) => StatusCode::NOT_FOUND,
        Error::Navigation(_) => StatusCode::CONFLICT,
        Error::Solver { .. } => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let location = match &e {
            Error::Io { path, .. } => Some(json!({ "file": path })),
            other => other.location().map(|l| serde_json::to_value(l).unwrap_or_default()),
        };
        ApiError { status: status_of(&e), message: e.to_string(), location }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(loc) = self.location {
            body["location"] = loc;
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

struct Slot {
    session: RwLock<Session>,
    busy: AtomicBool,
    last_used: Mutex<Instant>,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().unwrap() = Instant::now();
    }
}

/// Releases a slot's busy flag on drop.
struct BusyGuard(Arc<Slot>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

/// A summary of the preloaded model, served by `/health`.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub model_kind: rulelens::ingest::ModelKind,
    pub n_trees: usize,
    pub n_rules: usize,
    pub n_samples: usize,
    pub n_attributes: usize,
    pub classes: Vec<String>,
}

impl ModelSummary {
    pub fn of(a: &Analysis) -> Self {
        ModelSummary {
            model_kind: a.ensemble.model_kind,
            n_trees: a.ensemble.trees.len(),
            n_rules: a.n_rules(),
            n_samples: a.samples.len(),
            n_attributes: a.schema.n_attributes(),
            classes: a.schema.classes.clone(),
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
    preloaded: Option<Arc<Analysis>>,
    options: ReduceOptions,
    idle_timeout: Duration,
}

impl AppState {
    /// `preloaded` serves `POST /sessions` requests that name no files;
    /// `options` is the reduction used for every level unless a request
    /// overrides the budget.
    pub fn new(preloaded: Option<Arc<Analysis>>, options: ReduceOptions, idle_timeout: Duration) -> Self {
        AppState {
            inner: Arc::new(Inner { sessions: RwLock::new(HashMap::new()), preloaded, options, idle_timeout }),
        }
    }

    pub fn n_sessions(&self) -> usize {
        self.inner.sessions.read().unwrap().len()
    }

    /// Drop sessions idle for longer than the timeout; returns how many.
    pub fn evict_idle(&self) -> usize {
        let timeout = self.inner.idle_timeout;
        let mut sessions = self.inner.sessions.write().unwrap();
        let before = sessions.len();
        sessions.retain(|_, s| s.busy.load(Ordering::Acquire) || s.last_used.lock().unwrap().elapsed() < timeout);
        before - sessions.len()
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        let slot = self
            .inner
            .sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))?;
        slot.touch();
        Ok(slot)
    }

    async fn read<T, F>(&self, id: &str, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&Session) -> Result<T, Error> + Send + 'static,
    {
        let slot = self.slot(id)?;
        let out = tokio::task::spawn_blocking(move || f(&slot.session.read().unwrap()))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
        Ok(Json(out))
    }

    async fn mutate<T, F>(&self, id: &str, f: F) -> ApiResult<T>
    where
        T: Send + 'static,
        F: FnOnce(&mut Session) -> Result<T, Error> + Send + 'static,
    {
        let slot = self.slot(id)?;
        if slot.busy.compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire).is_err() {
            return Err(ApiError::new(StatusCode::CONFLICT, "another request is modifying this session"));
        }
        let guard = BusyGuard(slot);
        let out = tokio::task::spawn_blocking(move || {
            let r = f(&mut guard.0.session.write().unwrap());
            drop(guard);
            r
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
        Ok(Json(out))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(current_level))
        .route("/sessions/{id}/zoom", post(zoom))
        .route("/sessions/{id}/back", post(back))
        .route("/sessions/{id}/order", post(order))
        .route("/sessions/{id}/rules/{rid}", get(rule_detail))
        .route("/sessions/{id}/filter", post(filter))
        .route("/sessions/{id}/samples", get(samples))
        .route("/sessions/{id}/info", get(info))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Evict idle sessions once a minute, forever.
pub fn spawn_eviction(state: AppState) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = state.evict_idle();
            if n > 0 {
                log::info!("evicted {n} idle session(s)");
            }
        }
    })
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "model": state.inner.preloaded.as_deref().map(ModelSummary::of),
        "sessions": state.n_sessions(),
    }))
}

/// Sessions are private to their creators; there is no listing.
async fn list_sessions() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "sessions are addressed by id")
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateSession {
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
    pub dataset: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    /// Rules per level.
    pub m: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Created {
    id: String,
    level: rulelens::session::LevelPayload,
}

async fn create_session(
    State(state): State<AppState>,
    body: Option<Json<CreateSession>>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let mut options = state.inner.options.clone();
    if let Some(m) = req.m {
        if m == 0 {
            return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "m must be at least 1"));
        }
        options.budget = m;
    }
    let preloaded = state.inner.preloaded.clone();
    let session = tokio::task::spawn_blocking(move || -> Result<Session, Error> {
        let analysis = match (req.model, req.dataset, req.schema) {
            (Some(model), Some(data), Some(schema)) => {
                let format: ModelFormat = req.format.as_deref().unwrap_or("json").parse()?;
                Arc::new(Analysis::load(model, format, data, schema)?)
            }
            (None, None, None) => preloaded
                .ok_or_else(|| Error::InvalidArgument("no model is preloaded; give model, dataset and schema".into()))?,
            _ => return Err(Error::InvalidArgument("give all of model, dataset and schema, or none".into())),
        };
        Session::new(analysis, options)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let level = session.payload();
    let slot = Slot { session: RwLock::new(session), busy: AtomicBool::new(false), last_used: Mutex::new(Instant::now()) };
    state.inner.sessions.write().unwrap().insert(id.clone(), Arc::new(slot));
    log::info!("created session {id}");
    Ok((StatusCode::CREATED, Json(Created { id, level })))
}

async fn current_level(State(state): State<AppState>, Path(id): Path<String>) -> impl IntoResponse {
    state.read(&id, |s| Ok(s.payload())).await
}

#[derive(Debug, Deserialize)]
struct ZoomRequest {
    selected: Vec<usize>,
}

async fn zoom(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ZoomRequest>, JsonRejection>,
) -> impl IntoResponse {
    let Json(req) = body?;
    state.mutate(&id, move |s| s.zoom(&req.selected)).await
}

async fn back(State(state): State<AppState>, Path(id): Path<String>) -> impl IntoResponse {
    state.mutate(&id, |s| s.back()).await
}

async fn order(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<OrderRequest>, JsonRejection>,
) -> impl IntoResponse {
    let Json(req) = body?;
    state.mutate(&id, move |s| s.order(&req)).await
}

async fn rule_detail(State(state): State<AppState>, Path((id, rid)): Path<(String, usize)>) -> impl IntoResponse {
    state.read(&id, move |s| s.rule_detail(rid)).await
}

#[derive(Debug, Deserialize)]
struct FilterRequest {
    #[serde(default)]
    predicates: Vec<Predicate>,
}

async fn filter(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<FilterRequest>, JsonRejection>,
) -> impl IntoResponse {
    let Json(req) = body?;
    state.mutate(&id, move |s| s.apply_filter(req.predicates)).await
}

#[derive(Debug, Deserialize)]
struct SamplesQuery {
    sort: Option<String>,
    dir: Option<Direction>,
    #[serde(default)]
    page: usize,
}

async fn samples(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SamplesQuery>,
) -> impl IntoResponse {
    state.read(&id, move |s| s.samples(q.sort.as_deref(), q.dir.unwrap_or(Direction::Asc), q.page)).await
}

async fn info(State(state): State<AppState>, Path(id): Path<String>) -> impl IntoResponse {
    state.read(&id, |s| Ok(s.info())).await
}
