//! Read-only HTTP API over a store, plus static hosting for the web UI.
//!
//! | route | body |
//! |---|---|
//! | `GET /api/videos` | manifest entries sorted by title |
//! | `GET /api/videos/{id}` | document |
//! | `GET /api/videos/{id}/poster` | poster |
//! | `GET /api/videos/{id}/segments/{n}` | [`SegmentPayload`] |
//! | `GET /api/search?q=&limit=` | hits |
//! | `GET /assets/{ref}` | stored image |
//!
//! Every error is an [`ApiError`] body. The search index is loaded once at
//! startup; nothing in the request path writes to the store.

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use lecturedeck_core::search::DEFAULT_LIMIT;
use lecturedeck_core::{Cue, Hit, Poster, Region, SearchIndex, VideoDocument};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::error::Error;
use crate::store::{is_safe_relative, ManifestEntry, Store};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e.code() {
            "not_found" => StatusCode::NOT_FOUND,
            "conflict" => StatusCode::CONFLICT,
            "usage" | "invalid_input" => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<lecturedeck_core::Error> for ApiError {
    fn from(e: lecturedeck_core::Error) -> Self {
        Error::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Frame-layer view of one segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPayload {
    pub video_id: String,
    pub index: usize,
    pub start_ms: u64,
    pub end_ms: u64,
    pub keyframe: Option<String>,
    pub title: String,
    pub regions: Vec<Region>,
    pub speech: String,
    pub cues: Vec<Cue>,
}

#[derive(Debug, Clone, Default)]
pub struct ApiConfig {
    /// Directory served for non-API paths; `index.html` answers `/`.
    pub ui_dir: Option<PathBuf>,
    /// Allowed cross-origin callers; `*` allows any.
    pub cors_origins: Vec<String>,
}

struct AppState {
    store: Store,
    index: ApiResult<SearchIndex>,
    ui_dir: Option<PathBuf>,
}

type Shared = State<Arc<AppState>>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| {
        Err(ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "internal",
            e.to_string(),
        ))
    })
}

fn path_param<T>(p: std::result::Result<Path<T>, PathRejection>) -> ApiResult<T> {
    p.map(|Path(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_input", e.body_text()))
}

async fn list_videos(State(app): Shared) -> ApiResult<Json<Vec<ManifestEntry>>> {
    let store = app.store.clone();
    blocking(move || Ok(store.list_videos()?)).await.map(Json)
}

async fn get_document(
    State(app): Shared,
    id: std::result::Result<Path<String>, PathRejection>,
) -> ApiResult<Json<VideoDocument>> {
    let id = path_param(id)?;
    let store = app.store.clone();
    blocking(move || Ok(store.load_document(&id)?))
        .await
        .map(Json)
}

async fn get_poster(
    State(app): Shared,
    id: std::result::Result<Path<String>, PathRejection>,
) -> ApiResult<Json<Poster>> {
    let id = path_param(id)?;
    let store = app.store.clone();
    blocking(move || Ok(store.load_poster(&id)?))
        .await
        .map(Json)
}

async fn get_segment(
    State(app): Shared,
    params: std::result::Result<Path<(String, String)>, PathRejection>,
) -> ApiResult<Json<SegmentPayload>> {
    let (id, n) = path_param(params)?;
    let store = app.store.clone();
    let doc = blocking(move || Ok(store.load_document(&id)?)).await?;
    let seg = n
        .parse::<usize>()
        .ok()
        .and_then(|n| doc.segments.get(n))
        .ok_or_else(|| {
            ApiError::not_found(format!(
                "segment {n} of {} ({} segments)",
                doc.video_id,
                doc.segments.len()
            ))
        })?;
    Ok(Json(SegmentPayload {
        video_id: doc.video_id.clone(),
        index: seg.index,
        start_ms: seg.start_ms,
        end_ms: seg.end_ms,
        keyframe: seg.keyframe.clone(),
        title: seg.title.clone(),
        regions: seg.regions.clone(),
        speech: seg.speech.clone(),
        cues: seg.cues.clone(),
    }))
}

/// Parses `limit`; absent means the default.
pub fn parse_limit(raw: Option<&str>) -> ApiResult<usize> {
    let Some(raw) = raw else {
        return Ok(DEFAULT_LIMIT);
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(ApiError::bad_request(
            "invalid_input",
            format!("limit must be a positive integer, got {raw:?}"),
        )),
    }
}

async fn search(
    State(app): Shared,
    query: std::result::Result<Query<BTreeMap<String, String>>, QueryRejection>,
) -> ApiResult<Json<Vec<Hit>>> {
    let Query(params) = query.map_err(|e| ApiError::bad_request("invalid_input", e.body_text()))?;
    let limit = parse_limit(params.get("limit").map(String::as_str))?;
    let index = app.index.as_ref().map_err(Clone::clone)?;
    let q = params.get("q").map(String::as_str).unwrap_or("");
    Ok(Json(index.search(q, limit)?))
}

fn content_type(path: &FsPath) -> &'static str {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "png" => "image/png",
        "jpg" | "jpeg" => "image/jpeg",
        "svg" => "image/svg+xml",
        "ico" => "image/x-icon",
        "html" | "htm" => "text/html; charset=utf-8",
        "css" => "text/css; charset=utf-8",
        "js" | "mjs" => "text/javascript; charset=utf-8",
        "json" | "map" => "application/json",
        "txt" => "text/plain; charset=utf-8",
        "woff2" => "font/woff2",
        _ => "application/octet-stream",
    }
}

async fn send_file(path: PathBuf) -> ApiResult<Response> {
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError::from(Error::io(&path, e)))?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response())
}

fn reject_traversal(reference: &str) -> ApiResult<()> {
    if reference.split(['/', '\\']).any(|part| part == "..") {
        return Err(ApiError::bad_request(
            "invalid_input",
            format!("path {reference:?} must not contain '..'"),
        ));
    }
    Ok(())
}

async fn get_asset(
    State(app): Shared,
    reference: std::result::Result<Path<String>, PathRejection>,
) -> ApiResult<Response> {
    let reference = path_param(reference)?;
    reject_traversal(&reference)?;
    let path = app.store.asset_path(&reference)?;
    send_file(path).await
}

async fn fallback(State(app): Shared, method: Method, uri: Uri) -> ApiResult<Response> {
    let rel = uri.path().trim_start_matches('/');
    reject_traversal(rel)?;
    let no_route = || ApiError::not_found(format!("no resource at {}", uri.path()));
    if method != Method::GET && method != Method::HEAD {
        return Err(ApiError::bad_request(
            "read_only",
            format!("{method} is not supported; the API is read-only"),
        ));
    }
    let Some(ui) = &app.ui_dir else {
        return Err(no_route());
    };
    if rel.starts_with("api/") || rel == "api" {
        return Err(no_route());
    }
    let rel = if rel.is_empty() || rel.ends_with('/') {
        format!("{rel}index.html")
    } else {
        rel.to_string()
    };
    if !is_safe_relative(&rel) {
        return Err(no_route());
    }
    let path = ui.join(&rel);
    if !path.is_file() {
        return Err(no_route());
    }
    send_file(path).await
}

async fn method_not_allowed(method: Method) -> ApiError {
    ApiError::bad_request(
        "read_only",
        format!("{method} is not supported; the API is read-only"),
    )
}

async fn log_requests(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let started = Instant::now();
    let resp = next.run(req).await;
    tracing::info!(
        target: "lecturedeck::access",
        "{method} {path} {} {}ms",
        resp.status().as_u16(),
        started.elapsed().as_millis()
    );
    resp
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    Some(
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([Method::GET, Method::HEAD]),
    )
}

/// Builds the application. The search index is read here, once; a missing
/// index counts as empty and an unreadable one makes `/api/search` fail.
pub fn router(store: Store, config: ApiConfig) -> Router {
    let index = store.load_index().map_err(ApiError::from);
    if let Err(e) = &index {
        tracing::warn!("search disabled: {}", e.message);
    }
    let state = Arc::new(AppState {
        store,
        index,
        ui_dir: config.ui_dir,
    });
    let mut app = Router::new()
        .route("/api/videos", get(list_videos))
        .route("/api/videos/{id}", get(get_document))
        .route("/api/videos/{id}/poster", get(get_poster))
        .route("/api/videos/{id}/segments/{n}", get(get_segment))
        .route("/api/search", get(search))
        .route("/assets/{*reference}", get(get_asset))
        .fallback(fallback)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
        .layer(middleware::from_fn(log_requests));
    if let Some(cors) = cors_layer(&config.cors_origins) {
        app = app.layer(cors);
    }
    app
}

/// Serves until Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
