//! The local HTTP+JSON session service.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use reductive::session::SessionStore;
use reductive::space::{Export, ExportFormat};

use crate::api::{self, ApiError, ApiResult, ErrorKind};

pub const DEFAULT_SPACE_DEPTH: usize = 2;

/// Shared service state: the store and one mutation lock per session.
#[derive(Clone)]
pub struct AppState {
    store: Arc<SessionStore>,
    locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(store: SessionStore) -> Self {
        AppState {
            store: Arc::new(store),
            locks: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table");
        Arc::clone(locks.entry(id.to_string()).or_default())
    }

    /// Run `op` against the store while holding the session's lock, off the
    /// async executor. Reads take the lock too, so they never see half an append.
    async fn with_session<T: Send + 'static>(
        &self,
        id: &str,
        op: impl FnOnce(&SessionStore) -> Result<T, ApiError> + Send + 'static,
    ) -> Result<T, ApiError> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let store = Arc::clone(&self.store);
        tokio::task::spawn_blocking(move || op(&store))
            .await
            .map_err(|e| ApiError::new(ErrorKind::Internal, e.to_string()))?
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.kind.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.to_json())).into_response()
    }
}

fn body_json(bytes: &Bytes) -> Result<Value, ApiError> {
    if bytes.is_empty() {
        return Ok(json!({}));
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError {
        kind: ErrorKind::Parse,
        message: format!("request body is not JSON: {e}"),
        position: Some(e.column().saturating_sub(1)),
    })
}

fn reply(result: ApiResult) -> Response {
    match result {
        Ok(v) => Json(v).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn create(State(app): State<AppState>, body: Bytes) -> Response {
    let result = body_json(&body).and_then(|b| api::create(&app.store, &b));
    match result {
        Ok(view) => (StatusCode::CREATED, Json(view)).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn list(State(app): State<AppState>) -> Response {
    reply(app.store.list().map(|ids| json!(ids)).map_err(ApiError::from))
}

async fn show(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let key = id.clone();
    reply(app.with_session(&key, move |s| api::show(s, &id)).await)
}

async fn apply(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let body = match body_json(&body) {
        Ok(b) => b,
        Err(e) => return e.into_response(),
    };
    let key = id.clone();
    reply(app.with_session(&key, move |s| api::apply(s, &id, &body)).await)
}

async fn backtrack(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let key = id.clone();
    reply(app.with_session(&key, move |s| api::backtrack(s, &id)).await)
}

async fn tactic(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let body = match body_json(&body) {
        Ok(b) => b,
        Err(e) => return e.into_response(),
    };
    let key = id.clone();
    reply(app.with_session(&key, move |s| api::tactic(s, &id, &body)).await)
}

#[derive(Debug, Deserialize)]
struct SpaceQuery {
    depth: Option<String>,
    goal: Option<usize>,
    format: Option<String>,
}

fn depth_header(depth: usize) -> [(header::HeaderName, HeaderValue); 1] {
    [(header::HeaderName::from_static("x-space-depth"), HeaderValue::from(depth))]
}

async fn space(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<SpaceQuery>) -> Response {
    let depth = match api::parse_depth(q.depth.as_deref(), DEFAULT_SPACE_DEPTH) {
        Ok(d) => d,
        Err(e) => return e.into_response(),
    };
    let key = id.clone();
    match app.with_session(&key, move |s| api::space(s, &id, depth, q.goal)).await {
        Ok((node, used)) => (depth_header(used), Json(node.to_json())).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn export(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<SpaceQuery>) -> Response {
    let depth = match api::parse_depth(q.depth.as_deref(), DEFAULT_SPACE_DEPTH) {
        Ok(d) => d,
        Err(e) => return e.into_response(),
    };
    let format = q.format.unwrap_or_else(|| "dot".to_string());
    let key = id.clone();
    match app.with_session(&key, move |s| api::export(s, &id, &format, depth, q.goal)).await {
        Ok((format, text)) => {
            let mime = match format {
                ExportFormat::Dot => "text/vnd.graphviz; charset=utf-8",
                ExportFormat::Json => "application/json",
            };
            ([(header::CONTENT_TYPE, mime)], text).into_response()
        }
        Err(e) => e.into_response(),
    }
}

pub fn router(store: SessionStore) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(show))
        .route("/sessions/{id}/apply", post(apply))
        .route("/sessions/{id}/backtrack", post(backtrack))
        .route("/sessions/{id}/tactic", post(tactic))
        .route("/sessions/{id}/space", get(space))
        .route("/sessions/{id}/export", get(export))
        .with_state(AppState::new(store))
}

pub async fn serve(addr: SocketAddr, store: SessionStore) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store)).await
}
