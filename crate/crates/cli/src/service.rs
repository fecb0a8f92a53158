//! Local HTTP service over one read-only index.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Deserialize;
use serde_json::{json, Value};
use structsearch::config::{ConfigOverrides, EngineConfig};
use structsearch::index::CorpusIndex;
use structsearch::recommend::RecommendError;

use crate::{document, parse_value, recommendations};

pub struct AppState {
    pub index: CorpusIndex,
    pub config: EngineConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecommendRequest {
    query: Value,
    #[serde(default)]
    config: Option<Value>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new().route("/health", get(health)).route("/recommend", post(recommend)).with_state(state)
}

fn error(status: StatusCode, message: impl std::fmt::Display) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], json!({ "error": message.to_string() }).to_string())
        .into_response()
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let body = json!({ "status": "ok", "methods": state.index.len(), "features": state.index.feature_count() });
    ([(header::CONTENT_TYPE, "application/json")], body.to_string()).into_response()
}

async fn recommend(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let request: RecommendRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let config = match request.config.map(ConfigOverrides::from_json).transpose() {
        Ok(o) => match o.unwrap_or_default().apply(&state.config) {
            Ok(c) => c,
            Err(e) => return error(StatusCode::BAD_REQUEST, e),
        },
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    let query = match parse_value(&request.query) {
        Ok(q) => q,
        Err(e) => return error(StatusCode::UNPROCESSABLE_ENTITY, e),
    };
    let worker = state.clone();
    let result = tokio::task::spawn_blocking(move || recommendations(&worker.index, query, &config)).await;
    match result {
        Ok(Ok(recs)) => ([(header::CONTENT_TYPE, "application/json")], document(recs)).into_response(),
        Ok(Err(e @ RecommendError::Parse(_))) | Ok(Err(e @ RecommendError::Search(_))) => {
            error(StatusCode::UNPROCESSABLE_ENTITY, e)
        }
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

/// Serves until the process is interrupted.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
