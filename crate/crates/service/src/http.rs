use std::future::Future;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use swarmsearch_core::pheromone::Timestamp;
use tokio::net::TcpListener;
use tracing::info;

use crate::engine::SearchEngine;
use crate::error::ServiceError;

fn now() -> Timestamp {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs() as Timestamp).unwrap_or(0)
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::Core(swarmsearch_core::Error::InvalidQuery) | ServiceError::BadPage | ServiceError::BadToken => {
                StatusCode::BAD_REQUEST
            }
            ServiceError::UnknownToken => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
    p: Option<u32>,
    u: Option<String>,
}

#[derive(Deserialize)]
struct ClickParams {
    #[serde(default)]
    t: String,
}

async fn search(State(engine): State<Arc<SearchEngine>>, Query(params): Query<SearchParams>) -> Response {
    let user = params.u.as_deref().unwrap_or("anonymous");
    match engine.handle_search(&params.q, params.p.unwrap_or(1), user, now()) {
        Ok(page) => Json(page).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn click(State(engine): State<Arc<SearchEngine>>, Query(params): Query<ClickParams>) -> Response {
    match engine.handle_click(&params.t, now()) {
        Ok(url) => (StatusCode::FOUND, [(header::LOCATION, url.as_str().to_string())]).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn stats(State(engine): State<Arc<SearchEngine>>) -> Response {
    Json(engine.stats()).into_response()
}

pub fn router(engine: Arc<SearchEngine>) -> Router {
    Router::new()
        .route("/search", get(search))
        .route("/click", get(click))
        .route("/healthz", get(|| async { "ok" }))
        .route("/stats", get(stats))
        .with_state(engine)
}

/// Serves until `shutdown` resolves, then flushes the log and writes the
/// trail snapshot if one is configured.
pub async fn serve<F>(engine: Arc<SearchEngine>, listener: TcpListener, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(engine.clone())).with_graceful_shutdown(shutdown).await?;
    engine.log().flush();
    engine.save_snapshot().map_err(std::io::Error::other)?;
    Ok(())
}
