//! HTTP API. Request and response bodies are JSON; see `docs/http-api.md`
//! for the exact shapes.
//!
//! | method | path                    | purpose                               |
//! |--------|-------------------------|---------------------------------------|
//! | GET    | `/health`               | load status and database counts       |
//! | POST   | `/analyze`              | morphological analyses of a text      |
//! | POST   | `/expand`               | open a session with proposed terms    |
//! | GET    | `/sessions/{id}`        | current session state                 |
//! | POST   | `/sessions/{id}/select` | toggle candidates                     |
//! | POST   | `/sessions/{id}/search` | search with the current selection     |

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use qamar_core::awn::LexicalCounts;
use qamar_core::pipeline::PipelineError;
use qamar_core::query::{self, QueryError};
use qamar_core::search::{LocalIndex, WebBackend, WebError};
use qamar_core::{ExpansionConfig, Pipeline, SearchResult, Selection};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::app::{Backend, BackendKind, SearchFailure, DEFAULT_K};
use crate::session::{Session, SessionStore};
use crate::views::{self, AnalyzeView, GroupView, QueryView, SearchView};

pub struct AppState {
    pub pipeline: Pipeline,
    pub sessions: SessionStore,
    pub local: Option<Arc<LocalIndex>>,
    pub web: Option<Arc<WebBackend>>,
    pub default_backend: BackendKind,
    /// Why the lexical database is missing, if it is.
    pub awn_error: Option<String>,
}

impl AppState {
    fn backend(&self, kind: BackendKind) -> Result<Backend, ApiError> {
        let missing = || {
            ApiError::bad_request(
                Some("backend"),
                format!(
                    "the {} backend is not configured on this server",
                    kind.as_str()
                ),
            )
        };
        match kind {
            BackendKind::Local => self.local.clone().map(Backend::Local).ok_or_else(missing),
            BackendKind::Web => self.web.clone().map(Backend::Web).ok_or_else(missing),
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(
        status: StatusCode,
        code: &'static str,
        message: impl Into<String>,
        field: Option<&str>,
    ) -> Self {
        Self {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                field: field.map(str::to_string),
            },
        }
    }

    fn bad_request(field: Option<&str>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message, field)
    }

    fn unknown_session(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_session",
            format!("no session `{id}`"),
            None,
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.body }))).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::NoLexicalDb => Self::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "lexical_db_unavailable",
                e.to_string(),
                None,
            ),
            PipelineError::Config(_) => Self::bad_request(Some("config"), e.to_string()),
            PipelineError::Query(_) => Self::bad_request(None, e.to_string()),
        }
    }
}

/// JSON body whose decoding errors name the offending field.
pub struct Body<T>(pub T);

impl<S, T> FromRequest<S> for Body<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::bad_request(None, e.body_text()))?;
        let bytes: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) {
            b"{}"
        } else {
            &bytes
        };
        let mut de = serde_json::Deserializer::from_slice(bytes);
        serde_path_to_error::deserialize(&mut de)
            .map(Body)
            .map_err(|e| {
                let field = field_of(&e);
                ApiError::bad_request(
                    field.as_deref(),
                    format!("invalid request body: {}", e.inner()),
                )
            })
    }
}

fn field_of(err: &serde_path_to_error::Error<serde_json::Error>) -> Option<String> {
    if err.inner().is_syntax() || err.inner().is_eof() {
        return None;
    }
    let path = err.path().to_string();
    let inner = err.inner().to_string();
    // the path already ends at an unknown key but stops above a missing one
    let missing = inner
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next());
    match (path.as_str(), missing) {
        (".", missing) => missing.map(str::to_string),
        (path, Some(leaf)) => Some(format!("{path}.{leaf}")),
        (path, None) => Some(path.to_string()),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/analyze", post(analyze))
        .route("/expand", post(expand))
        .route("/sessions/{id}", get(session_state))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/search", post(search))
        .with_state(state)
}

/// Serves until the process is interrupted.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Runs the server on its own runtime, blocking the calling thread.
pub fn serve_blocking(
    listener: std::net::TcpListener,
    state: Arc<AppState>,
) -> std::io::Result<()> {
    listener.set_nonblocking(true)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        serve(listener, state).await
    })
}

#[derive(Debug, Serialize)]
struct DbStatus<C> {
    loaded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<C>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct BackendStatus {
    available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    documents: Option<usize>,
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let awn = match state.pipeline.awn() {
        Some(db) => DbStatus {
            loaded: true,
            counts: Some(db.counts()),
            error: None,
        },
        None => DbStatus::<LexicalCounts> {
            loaded: false,
            counts: None,
            error: state.awn_error.clone(),
        },
    };
    let status = if awn.loaded { "ok" } else { "degraded" };
    Json(serde_json::json!({
        "status": status,
        "lexdb": DbStatus {
            loaded: true,
            counts: Some(state.pipeline.morph().counts()),
            error: None,
        },
        "awn": awn,
        "backends": {
            "local": BackendStatus {
                available: state.local.is_some(),
                documents: state.local.as_ref().map(|i| i.doc_count()),
            },
            "web": BackendStatus {
                available: state.web.is_some(),
                documents: None,
            },
        },
        "default_backend": state.default_backend,
        "sessions": state.sessions.len(),
    }))
    .into_response()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalyzeRequest {
    text: String,
}

async fn analyze(
    State(state): State<Arc<AppState>>,
    Body(req): Body<AnalyzeRequest>,
) -> Json<AnalyzeView> {
    let analyses = state.pipeline.analyze(&req.text);
    Json(AnalyzeView {
        tokens: views::analyses(state.pipeline.morph(), &analyses),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpandRequest {
    text: String,
    #[serde(default)]
    config: BTreeMap<String, serde_json::Value>,
}

/// Server defaults with the request's overrides applied.
fn request_config(
    base: &ExpansionConfig,
    overrides: &BTreeMap<String, serde_json::Value>,
) -> Result<ExpansionConfig, ApiError> {
    let mut config = base.clone();
    for (key, value) in overrides {
        let field = format!("config.{key}");
        let text = match value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Array(items) if items.is_empty() => "none".to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|item| item.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| ApiError::bad_request(Some(&field), "expected an array of strings"))?
                .join(","),
            _ => {
                return Err(ApiError::bad_request(
                    Some(&field),
                    "expected a string, number, boolean or array",
                ))
            }
        };
        config
            .set(key, &text)
            .map_err(|message| ApiError::bad_request(Some(&field), message))?;
    }
    config
        .validate()
        .map_err(|e| ApiError::bad_request(Some("config"), e.to_string()))?;
    Ok(config)
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub session_id: Uuid,
    pub text: String,
    pub created_at_ms: u128,
    pub updated_at_ms: u128,
    pub config: BTreeMap<String, String>,
    pub groups: Vec<GroupView>,
    /// Serializations of the query as currently selected.
    pub query: QueryView,
}

fn millis(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or_default()
}

fn session_view(pipeline: &Pipeline, session: &Session) -> Result<SessionView, ApiError> {
    let query = pipeline.build(&session.prepared, &[])?;
    Ok(SessionView {
        session_id: session.id,
        text: session.text.clone(),
        created_at_ms: millis(session.created_at),
        updated_at_ms: millis(session.updated_at),
        config: views::config(&session.prepared.config),
        groups: views::groups(&session.prepared.groups),
        query: QueryView::from(&query),
    })
}

async fn expand(
    State(state): State<Arc<AppState>>,
    Body(req): Body<ExpandRequest>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let config = request_config(state.pipeline.config(), &req.config)?;
    let prepared = state.pipeline.prepare(&req.text, Some(&config))?;
    let session = state.sessions.create(&req.text, prepared);
    Ok((
        StatusCode::CREATED,
        Json(session_view(&state.pipeline, &session)?),
    ))
}

fn session_id(raw: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(raw).map_err(|_| ApiError::unknown_session(raw))
}

async fn session_state(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let session = state
        .sessions
        .get(session_id(&id)?)
        .ok_or_else(|| ApiError::unknown_session(&id))?;
    Ok(Json(session_view(&state.pipeline, &session)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectRequest {
    /// Applied before `toggles`: selects or deselects every candidate.
    #[serde(default)]
    select_all: Option<bool>,
    #[serde(default)]
    toggles: Vec<Selection>,
}

async fn select(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Body(req): Body<SelectRequest>,
) -> Result<Json<SessionView>, ApiError> {
    let updated = state
        .sessions
        .update(session_id(&id)?, |session| {
            let groups = &mut session.prepared.groups;
            if let Some(all) = req.select_all {
                groups
                    .iter_mut()
                    .flat_map(|g| &mut g.candidates)
                    .for_each(|c| c.selected = all);
            }
            for (i, toggle) in req.toggles.iter().enumerate() {
                query::apply_selections(groups, std::slice::from_ref(toggle)).map_err(|e| {
                    let field = match e {
                        QueryError::UnknownCandidate { .. } if toggle.group >= groups.len() => {
                            "group"
                        }
                        _ => "term",
                    };
                    ApiError::bad_request(Some(&format!("toggles[{i}].{field}")), e.to_string())
                })?;
            }
            Ok::<(), ApiError>(())
        })
        .ok_or_else(|| ApiError::unknown_session(&id))??;
    Ok(Json(session_view(&state.pipeline, &updated)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchRequest {
    #[serde(default)]
    backend: Option<BackendKind>,
    #[serde(default)]
    k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct SearchResponse {
    session_id: Uuid,
    #[serde(flatten)]
    search: SearchView,
}

async fn search(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Body(req): Body<SearchRequest>,
) -> Result<Json<SearchResponse>, ApiError> {
    let session = state
        .sessions
        .get(session_id(&id)?)
        .ok_or_else(|| ApiError::unknown_session(&id))?;
    let k = req.k.unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(ApiError::bad_request(Some("k"), "k must be at least 1"));
    }
    let backend = state.backend(req.backend.unwrap_or(state.default_backend))?;
    let query = state.pipeline.build(&session.prepared, &[])?;
    let boolean = query.serialize_boolean();
    let kind = backend.kind();
    let results: Vec<SearchResult> = tokio::task::spawn_blocking(move || backend.search(&query, k))
        .await
        .map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "internal",
                e.to_string(),
                None,
            )
        })?
        .map_err(|e| match e {
            SearchFailure::Invalid(message) => ApiError::bad_request(None, message),
            SearchFailure::Web(e @ WebError::Timeout { .. }) => ApiError::new(
                StatusCode::GATEWAY_TIMEOUT,
                "backend_timeout",
                e.to_string(),
                None,
            ),
            SearchFailure::Web(e) => ApiError::new(
                StatusCode::BAD_GATEWAY,
                "backend_error",
                e.to_string(),
                None,
            ),
        })?;
    Ok(Json(SearchResponse {
        session_id: session.id,
        search: SearchView {
            query: boolean,
            backend: kind,
            k,
            results,
        },
    }))
}
