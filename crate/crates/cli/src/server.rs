// SPDX-License-Identifier: Apache-2.0

//! Local HTTP compile service.

use std::net::SocketAddr;
use std::path::PathBuf;

use axum::extract::rejection::BytesRejection;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use softc_core::pipeline::{CompileError, CompileRequest};
use softc_core::family_registry;
use tower_http::services::ServeDir;

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: &CompileError) -> Response {
    let status = StatusCode::from_u16(e.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    json(status, e.to_json())
}

async fn compile(body: Result<axum::body::Bytes, BytesRejection>) -> Response {
    let body = match body {
        Ok(b) => b,
        Err(e) => return error_response(&CompileError::Request(e.body_text())),
    };
    let outcome = tokio::task::spawn_blocking(move || {
        let text = std::str::from_utf8(&body).map_err(|e| CompileError::Request(e.to_string()))?;
        CompileRequest::from_json(text)?.compile()
    })
    .await;
    match outcome {
        Ok(Ok(result)) => json(StatusCode::OK, result.to_json()),
        Ok(Err(e)) => error_response(&e),
        Err(join) => json(
            StatusCode::INTERNAL_SERVER_ERROR,
            serde_json::json!({ "error": "InternalError", "message": join.to_string() }).to_string(),
        ),
    }
}

async fn families() -> Response {
    json(
        StatusCode::OK,
        serde_json::to_string_pretty(family_registry()).expect("families serialize"),
    )
}

async fn healthz() -> &'static str {
    "ok"
}

/// Routes of the service. Unmatched paths are served from `static_dir`
/// when given.
pub fn router(static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/compile", post(compile))
        .route("/api/families", get(families))
        .route("/healthz", get(healthz));
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until interrupted.
pub async fn serve(addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
