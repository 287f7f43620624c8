//! HTTP service for the 3D process viewer.
//!
//! | Method | Path | Body | Success |
//! |---|---|---|---|
//! | POST | `/models` | pm3d-1 XML | 201 `{model_id, summary}` |
//! | GET | `/models/{id}` | | 200 summary |
//! | POST | `/models/{id}/scene?backdrop=room` | mapping config text | 200 scene JSON |
//! | GET | `/models/{id}/nodes/{node_id}` | | 200 detail card |
//! | POST | `/generate` | generator spec JSON | 201 `{model_id, summary}` |
//!
//! Errors are JSON objects with an `error` field: 400 for unreadable
//! bodies, 404 for unknown ids, 413 for oversize bodies and 422 for mapping
//! configs that break the tuple rules. Static viewer assets are served under
//! `/ui` when a directory is configured.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pm3d_core::generator::{generate, GenSpec};
use pm3d_core::mapping::{validate_config, MappingConfig};
use pm3d_core::model::{AttributeKind, NodeKind, ProcessModel};
use pm3d_core::parser::{parse_named, ParseError};
use pm3d_core::pipeline::{render, RenderError};
use pm3d_core::scene::{node_details, to_json, BackdropKind, SceneOptions};

pub mod store;

pub use store::{ModelStore, StoredModel, DEFAULT_CAPACITY};

/// Default request body limit: 8 MiB.
pub const DEFAULT_BODY_LIMIT: usize = 8 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub capacity: usize,
    pub body_limit: usize,
    /// Directory with built viewer assets, served under `/ui`.
    pub ui_dir: Option<PathBuf>,
    /// Backdrop used when a scene request does not ask for one.
    pub default_backdrop: BackdropKind,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            capacity: DEFAULT_CAPACITY,
            body_limit: DEFAULT_BODY_LIMIT,
            ui_dir: None,
            default_backdrop: BackdropKind::Room,
        }
    }
}

struct AppState {
    store: ModelStore,
    default_backdrop: BackdropKind,
}

type Shared = Arc<AppState>;

pub fn router(config: ServiceConfig) -> Router {
    let state = Arc::new(AppState {
        store: ModelStore::new(config.capacity),
        default_backdrop: config.default_backdrop,
    });
    let app = Router::new()
        .route("/models", post(upload_model))
        .route("/models/{id}", get(model_summary))
        .route("/models/{id}/scene", post(model_scene))
        .route("/models/{id}/nodes/{node_id}", get(node_card))
        .route("/generate", post(generate_model))
        .with_state(state)
        .layer(DefaultBodyLimit::max(config.body_limit));
    match config.ui_dir {
        Some(dir) => app.nest_service("/ui", tower_http::services::ServeDir::new(dir)),
        None => app
            .route("/ui", get(ui_placeholder))
            .route("/ui/", get(ui_placeholder)),
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    serve_on(tokio::net::TcpListener::bind(addr).await?, config).await
}

/// Serves on an already bound listener until Ctrl-C.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    config: ServiceConfig,
) -> std::io::Result<()> {
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSummary {
    pub name: String,
    pub kind: AttributeKind,
    pub carriers: usize,
}

/// What the viewer needs to fill its configuration panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub origin: String,
    pub task_count: usize,
    pub nodes: Vec<NodeSummary>,
    pub attributes: Vec<AttributeSummary>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub line: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub model_id: String,
    pub summary: ModelSummary,
}

pub fn summarize(stored: &StoredModel) -> ModelSummary {
    let m: &ProcessModel = &stored.model;
    ModelSummary {
        name: m.name().to_owned(),
        origin: stored.origin.clone(),
        task_count: m.task_count(),
        nodes: m
            .nodes()
            .iter()
            .map(|n| NodeSummary {
                id: n.id.clone(),
                label: n.label.clone(),
                kind: n.kind,
            })
            .collect(),
        attributes: m
            .attribute_index()
            .iter()
            .map(|(name, info)| AttributeSummary {
                name: name.clone(),
                kind: info.kind,
                carriers: info.carriers.len(),
            })
            .collect(),
        warnings: stored
            .warnings
            .iter()
            .map(|(line, message)| Warning {
                line: *line,
                message: message.clone(),
            })
            .collect(),
    }
}

fn error(status: StatusCode, body: serde_json::Value) -> Response {
    (status, Json(body)).into_response()
}

fn not_found(what: &str, id: &str) -> Response {
    error(
        StatusCode::NOT_FOUND,
        json!({ "error": format!("unknown {what} `{id}`") }),
    )
}

fn created(state: &AppState, stored: StoredModel) -> Response {
    let summary = summarize(&stored);
    let model_id = state.store.insert(stored);
    (StatusCode::CREATED, Json(Created { model_id, summary })).into_response()
}

async fn upload_model(State(state): State<Shared>, body: Bytes) -> Response {
    let Ok(text) = std::str::from_utf8(&body) else {
        return error(
            StatusCode::BAD_REQUEST,
            json!({ "error": "body is not UTF-8" }),
        );
    };
    match parse_named(text, "upload") {
        Ok((model, diag)) => created(
            &state,
            StoredModel {
                model,
                origin: "upload".into(),
                warnings: diag.warnings,
            },
        ),
        Err(e) => {
            let violations = match &e {
                ParseError::InvalidModel(v) => serde_json::to_value(v).unwrap_or_default(),
                _ => json!([]),
            };
            error(
                StatusCode::BAD_REQUEST,
                json!({ "error": e.to_string(), "line": e.line(), "violations": violations }),
            )
        }
    }
}

async fn model_summary(State(state): State<Shared>, Path(id): Path<String>) -> Response {
    match state.store.get(&id) {
        Some(stored) => Json(summarize(&stored)).into_response(),
        None => not_found("model", &id),
    }
}

#[derive(Debug, Deserialize)]
struct SceneQuery {
    backdrop: Option<String>,
}

async fn model_scene(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(query): Query<SceneQuery>,
    body: Bytes,
) -> Response {
    let Some(stored) = state.store.get(&id) else {
        return not_found("model", &id);
    };
    let backdrop = match query.backdrop.as_deref().map(str::parse::<BackdropKind>) {
        None => state.default_backdrop,
        Some(Ok(kind)) => kind,
        Some(Err(e)) => return error(StatusCode::BAD_REQUEST, json!({ "error": e })),
    };
    let Ok(text) = std::str::from_utf8(&body) else {
        return error(
            StatusCode::BAD_REQUEST,
            json!({ "error": "body is not UTF-8" }),
        );
    };
    let config = match MappingConfig::parse(text) {
        Ok(c) => c,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                json!({ "error": e.to_string(), "line": e.line }),
            )
        }
    };
    let violations = validate_config(&stored.model, &config);
    if !violations.is_empty() {
        return error(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({ "error": "mapping config breaks the tuple rules", "violations": violations }),
        );
    }
    match render(&stored.model, &config, &SceneOptions { backdrop }) {
        Ok(scene) => (
            [(header::CONTENT_TYPE, "application/json")],
            to_json(&scene),
        )
            .into_response(),
        Err(RenderError::Resolve(e)) => error(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({ "error": e.to_string() }),
        ),
        Err(e) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "error": e.to_string() }),
        ),
    }
}

async fn node_card(
    State(state): State<Shared>,
    Path((id, node_id)): Path<(String, String)>,
) -> Response {
    let Some(stored) = state.store.get(&id) else {
        return not_found("model", &id);
    };
    match node_details(&stored.model, &node_id) {
        Ok(card) => Json(card).into_response(),
        Err(_) => not_found("node", &node_id),
    }
}

async fn generate_model(State(state): State<Shared>, body: Bytes) -> Response {
    let spec: GenSpec = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                json!({ "error": format!("bad spec: {e}") }),
            )
        }
    };
    match generate(&spec) {
        Ok(model) => created(
            &state,
            StoredModel {
                model,
                origin: "generate".into(),
                warnings: Vec::new(),
            },
        ),
        Err(e) => error(StatusCode::BAD_REQUEST, json!({ "error": e.to_string() })),
    }
}

async fn ui_placeholder() -> Html<&'static str> {
    Html(
        "<!doctype html><title>pm3d</title><p>No viewer assets configured. \
         Start the service with <code>--ui-dir</code> pointing at a built viewer, \
         or use the JSON API under <code>/models</code>.</p>",
    )
}
