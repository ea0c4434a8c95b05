//! Stateless HTTP/JSON service.
//!
//! Bodies are decoded by hand so malformed JSON gets the same error
//! envelope as every other failure.

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::cors::CorsLayer;

use crate::api::{self, ApiError, ApiResult, ErrorEnvelope};

fn error_response(status: StatusCode, envelope: ErrorEnvelope) -> Response {
    (status, Json(envelope)).into_response()
}

fn api_error(e: &ApiError) -> Response {
    let status = match e {
        ApiError::Domain(d) if d.is_malformed_input() => StatusCode::BAD_REQUEST,
        ApiError::Domain(_) => StatusCode::UNPROCESSABLE_ENTITY,
        ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error_response(status, e.into())
}

/// Decodes the body and runs `handler` on a blocking thread.
async fn handle<Req, Res, F>(body: Bytes, handler: F) -> Response
where
    Req: DeserializeOwned + Send + 'static,
    Res: Serialize + Send + 'static,
    F: FnOnce(&Req) -> ApiResult<Res> + Send + 'static,
{
    let request: Req = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, ErrorEnvelope::new("malformed_json", e.to_string())),
    };
    match tokio::task::spawn_blocking(move || handler(&request)).await {
        Ok(Ok(res)) => Json(res).into_response(),
        Ok(Err(e)) => api_error(&e),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, ErrorEnvelope::new("internal", e.to_string())),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn fallback() -> Response {
    error_response(StatusCode::NOT_FOUND, ErrorEnvelope::new("not_found", "no such endpoint"))
}

pub fn router(cors: bool) -> Router {
    let router = Router::new()
        .route("/api/health", get(health))
        .route("/api/schedule", post(|b: Bytes| handle(b, api::schedule)))
        .route("/api/rotate", post(|b: Bytes| handle(b, api::rotate)))
        .route("/api/design", post(|b: Bytes| handle(b, api::design)))
        .route("/api/region", post(|b: Bytes| handle(b, api::region)))
        .route("/api/verify-algebra", post(|b: Bytes| handle(b, api::verify_algebra)))
        .fallback(fallback);
    if cors {
        router.layer(CorsLayer::permissive())
    } else {
        router
    }
}

pub async fn serve(bind: &str, cors: bool) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(cors))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
