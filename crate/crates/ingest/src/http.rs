use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::cors::CorsLayer;
use wellness_core::journal::submission_to_line;
use wellness_core::{bank, SessionKind};

use crate::protocol::{Rejection, SubmissionEnvelope};
use crate::service::{RegisterError, Service, SubmitError, SubmitOutcome};

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/v1/participants", post(register))
        .route("/api/v1/submissions", post(submit))
        .route("/api/v1/experiments/{id}/dataset", get(dataset))
        .route("/api/v1/healthz", get(healthz))
        .route("/api/v1/questions", get(questions))
        .route("/api/v1/sensor/snapshot", get(snapshot))
        .layer(CorsLayer::permissive())
        .with_state(service)
}

fn error(status: StatusCode, code: &str, detail: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": code, "detail": detail.to_string() }))).into_response()
}

#[derive(Deserialize)]
struct RegisterBody {
    experiment_id: String,
}

async fn register(State(svc): State<Arc<Service>>, body: Bytes) -> Response {
    let Ok(body) = serde_json::from_slice::<RegisterBody>(&body) else {
        return error(StatusCode::BAD_REQUEST, "malformed", "expected {\"experiment_id\": ...}");
    };
    match svc.register(&body.experiment_id) {
        Ok(r) => (
            StatusCode::CREATED,
            Json(json!({ "participant_id": r.participant_id, "auth_token": r.auth_token })),
        )
            .into_response(),
        Err(e @ RegisterError::UnknownExperiment(_)) => error(StatusCode::NOT_FOUND, "unknown_experiment", e),
        Err(e @ RegisterError::Storage(_)) => error(StatusCode::SERVICE_UNAVAILABLE, "storage_failure", e),
    }
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    value.strip_prefix("Bearer ").map(str::trim)
}

fn rejection_response(r: Rejection) -> Response {
    let status = match r {
        Rejection::BadToken => StatusCode::UNAUTHORIZED,
        Rejection::Malformed(_) | Rejection::Incomplete(_) | Rejection::WrongSessionKind { .. } => StatusCode::BAD_REQUEST,
        Rejection::TooManyToday { .. } | Rejection::TooSoon { .. } => StatusCode::CONFLICT,
    };
    let mut body = json!({ "error": r.code(), "detail": r.to_string() });
    if let Rejection::Incomplete(ids) = &r {
        body["missing"] = json!(ids);
    }
    if let Rejection::WrongSessionKind { expected } = &r {
        body["expected_session_kind"] = json!(expected);
    }
    (status, Json(body)).into_response()
}

async fn submit(State(svc): State<Arc<Service>>, headers: HeaderMap, body: Bytes) -> Response {
    let token = bearer(&headers).unwrap_or("");
    let header_key = headers.get("idempotency-key").and_then(|v| v.to_str().ok()).map(str::to_string);
    let env = match serde_json::from_slice::<SubmissionEnvelope>(&body) {
        Ok(mut env) => {
            match header_key {
                Some(k) if env.idempotency_key.is_empty() => env.idempotency_key = k,
                Some(k) if k != env.idempotency_key => {
                    return malformed_after_auth(&svc, token, "Idempotency-Key header differs from body");
                }
                _ => {}
            }
            env
        }
        Err(e) => return malformed_after_auth(&svc, token, e),
    };
    match svc.submit(token, env).await {
        Ok(SubmitOutcome::Accepted { submission_id, validity }) => (
            StatusCode::CREATED,
            Json(json!({
                "submission_id": submission_id,
                "validity": if validity.is_valid() { "valid" } else { "invalid" },
                "reason": validity.reason().map(|r| r.to_string()),
            })),
        )
            .into_response(),
        Ok(SubmitOutcome::Replayed { submission_id }) => {
            (StatusCode::OK, Json(json!({ "submission_id": submission_id, "replayed": true }))).into_response()
        }
        Err(SubmitError::Rejected(r)) => rejection_response(r),
        Err(e @ SubmitError::Storage(_)) => error(StatusCode::SERVICE_UNAVAILABLE, "storage_failure", e),
    }
}

/// A bad token wins over a bad body.
fn malformed_after_auth(svc: &Service, token: &str, detail: impl std::fmt::Display) -> Response {
    if !svc.token_is_known(token) {
        return rejection_response(Rejection::BadToken);
    }
    rejection_response(Rejection::Malformed(detail.to_string()))
}

#[derive(Deserialize)]
struct DatasetQuery {
    #[serde(default)]
    include_invalid: bool,
}

async fn dataset(State(svc): State<Arc<Service>>, Path(id): Path<String>, Query(q): Query<DatasetQuery>) -> Response {
    let Some(subs) = svc.export(&id, q.include_invalid) else {
        return error(StatusCode::NOT_FOUND, "unknown_experiment", format!("unknown experiment `{id}`"));
    };
    let mut body = String::new();
    for s in &subs {
        body.push_str(&submission_to_line(s));
        body.push('\n');
    }
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

async fn healthz(State(svc): State<Arc<Service>>) -> Response {
    if svc.healthy() {
        Json(json!({ "status": "ok" })).into_response()
    } else {
        error(StatusCode::SERVICE_UNAVAILABLE, "storage_failure", "journals not writable")
    }
}

#[derive(Deserialize)]
struct QuestionsQuery {
    session_kind: Option<SessionKind>,
}

async fn questions(Query(q): Query<QuestionsQuery>) -> Response {
    let b = bank();
    let list: Vec<_> = match q.session_kind {
        Some(kind) => b.question_set(kind).into_iter().cloned().collect(),
        None => b.questions().to_vec(),
    };
    Json(json!({ "version": b.version(), "content_hash": b.content_hash(), "questions": list })).into_response()
}

async fn snapshot(State(svc): State<Arc<Service>>) -> Response {
    match svc.sensor_snapshot().await {
        Ok(s) => Json(s).into_response(),
        Err(e) => error(StatusCode::SERVICE_UNAVAILABLE, "sensor_unavailable", e),
    }
}
