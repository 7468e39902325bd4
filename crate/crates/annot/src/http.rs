//! HTTP routes. Handlers run service calls on the blocking pool because
//! rating commits fsync.
//!
//! | Method | Path | Body |
//! |---|---|---|
//! | GET | `/api/session/next?rater=<id>` | [`NextResponse`] |
//! | GET | `/api/clips/{id}/audio` | `audio/wav` bytes |
//! | GET | `/api/anchors` | `[AnchorView]` |
//! | GET | `/api/anchors/{pq}/{pole}/audio` | `audio/wav` bytes |
//! | POST | `/api/ratings` | [`RatingSubmission`] in, [`Ack`] out |
//! | GET | `/api/stats/agreement` | [`LiveAgreement`] |
//! | GET | `/api/export/ratings.csv` | `text/csv` |
//!
//! Errors are `{"code", "message"}` with a matching status.
//!
//! [`NextResponse`]: crate::service::NextResponse
//! [`RatingSubmission`]: crate::service::RatingSubmission
//! [`Ack`]: crate::service::Ack
//! [`LiveAgreement`]: crate::service::LiveAgreement

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;
use tower_http::services::ServeDir;
use voqual_core::PerceptualQuality;

use crate::anchors::Pole;
use crate::error::{AnnotError, ApiError, Result};
use crate::service::{AnnotService, RatingSubmission};

type Svc = Arc<AnnotService>;
type ApiResult<T> = std::result::Result<T, ApiError>;

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

async fn wav(path: PathBuf) -> ApiResult<Response> {
    let bytes = blocking(move || {
        std::fs::read(&path).map_err(|e| {
            log::error!("reading {}: {e}", path.display());
            ApiError::not_found("audio file unavailable")
        })
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response())
}

async fn next_clip(State(svc): State<Svc>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let rater = q
        .get("rater")
        .cloned()
        .ok_or_else(|| ApiError::bad_request("missing_rater", "query parameter `rater` is required"))?;
    let next = blocking(move || svc.next_clip(&rater)).await?;
    Ok(Json(next).into_response())
}

async fn clip_audio(State(svc): State<Svc>, Path(id): Path<String>) -> ApiResult<Response> {
    let path = svc
        .clip_audio_path(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown clip {id}")))?
        .to_path_buf();
    wav(path).await
}

async fn anchors(State(svc): State<Svc>) -> Response {
    Json(svc.anchors()).into_response()
}

async fn anchor_audio(State(svc): State<Svc>, Path((pq, pole)): Path<(String, String)>) -> ApiResult<Response> {
    let pq: PerceptualQuality = pq
        .parse()
        .map_err(|_| ApiError::not_found(format!("unknown quality {pq}")))?;
    let pole: Pole = pole.parse().map_err(ApiError::not_found)?;
    let path = svc
        .anchor_audio_path(pq, pole)
        .ok_or_else(|| ApiError::not_found(format!("no {pole} anchor for {pq}")))?
        .to_path_buf();
    wav(path).await
}

async fn submit(State(svc): State<Svc>, body: Bytes) -> ApiResult<Response> {
    let sub: RatingSubmission = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("bad_json", e.to_string()))?;
    let ack = blocking(move || svc.submit(&sub)).await?;
    Ok(Json(ack).into_response())
}

async fn agreement(State(svc): State<Svc>) -> ApiResult<Response> {
    let report = blocking(move || Ok(svc.live_agreement())).await?;
    Ok(Json(report).into_response())
}

async fn export(State(svc): State<Svc>) -> ApiResult<Response> {
    let csv = blocking(move || svc.export_csv().map_err(|e| ApiError::internal(e.to_string()))).await?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

pub fn router(svc: Svc) -> Router {
    let api = Router::new()
        .route("/api/session/next", get(next_clip))
        .route("/api/clips/{id}/audio", get(clip_audio))
        .route("/api/anchors", get(anchors))
        .route("/api/anchors/{pq}/{pole}/audio", get(anchor_audio))
        .route("/api/ratings", post(submit))
        .route("/api/stats/agreement", get(agreement))
        .route("/api/export/ratings.csv", get(export))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found));
    let app = match &svc.config().static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(api_not_found),
    };
    app.with_state(svc)
}

/// Binds `addr`, mapping an occupied port to [`AnnotError::PortBusy`].
pub async fn bind(addr: SocketAddr) -> Result<TcpListener> {
    TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            AnnotError::PortBusy(addr.to_string())
        } else {
            AnnotError::io(addr.to_string(), e)
        }
    })
}

/// Serves until Ctrl-C.
pub async fn serve(listener: TcpListener, svc: Svc) -> Result<()> {
    let addr = listener.local_addr().map_err(|e| AnnotError::io("listener", e))?;
    log::info!("annotation service listening on http://{addr}");
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| AnnotError::io(addr.to_string(), e))
}
