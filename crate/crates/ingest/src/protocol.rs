//! Study protocol rules, evaluated against one participant's accepted
//! history. Pure functions; the service serializes calls per participant.

use serde::{Deserialize, Serialize};
use wellness_core::survey::Completeness;
use wellness_core::{aggregate_session, bank, SensorSample, SessionKind, SurveyResponse};

use crate::config::ExperimentConfig;

/// What a client sends for one completed survey session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionEnvelope {
    pub idempotency_key: String,
    pub response: SurveyResponse,
    pub samples: Vec<SensorSample>,
    pub client_session_start: i64,
    pub client_session_end: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    BadToken,
    Malformed(String),
    Incomplete(Vec<String>),
    TooManyToday { limit: u32 },
    TooSoon { previous_ms: i64, min_gap_ms: i64 },
    WrongSessionKind { expected: SessionKind },
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::BadToken => "bad_token",
            Rejection::Malformed(_) => "malformed",
            Rejection::Incomplete(_) => "incomplete",
            Rejection::TooManyToday { .. } => "too_many_today",
            Rejection::TooSoon { .. } => "too_soon",
            Rejection::WrongSessionKind { .. } => "wrong_session_kind",
        }
    }
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::BadToken => f.write_str("unknown or missing bearer token"),
            Rejection::Malformed(m) => write!(f, "malformed envelope: {m}"),
            Rejection::Incomplete(ids) => write!(f, "unanswered questions: {}", ids.join(", ")),
            Rejection::TooManyToday { limit } => write!(f, "daily limit of {limit} submissions reached"),
            Rejection::TooSoon { previous_ms, min_gap_ms } => {
                write!(f, "within {min_gap_ms} ms of the submission at {previous_ms}")
            }
            Rejection::WrongSessionKind { expected } => match expected {
                SessionKind::FirstOfDay => f.write_str("first submission of the day must include the sleep items"),
                SessionKind::Subsequent => f.write_str("sleep items are only asked in the first submission of the day"),
            },
        }
    }
}

/// Structural checks that need no history.
pub fn check_envelope(env: &SubmissionEnvelope) -> Result<(), Rejection> {
    if env.idempotency_key.trim().is_empty() {
        return Err(Rejection::Malformed("empty idempotency_key".into()));
    }
    if env.client_session_start >= env.client_session_end {
        return Err(Rejection::Malformed("session start must precede session end".into()));
    }
    aggregate_session(&env.samples).map_err(|e| Rejection::Malformed(e.to_string()))?;
    Ok(())
}

/// Session-end timestamps of a participant's accepted submissions.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub accepted_end_ms: Vec<i64>,
}

/// Applies the daily limit, the minimum gap, the session-kind rule and
/// completeness, in that order. Returns the server-assigned session kind.
pub fn check_rules(cfg: &ExperimentConfig, history: &History, env: &SubmissionEnvelope) -> Result<SessionKind, Rejection> {
    let end = env.client_session_end;
    let day = cfg.local_day(end);
    let today = history.accepted_end_ms.iter().filter(|&&t| cfg.local_day(t) == day).count() as u32;
    if today >= cfg.max_submissions_per_day {
        return Err(Rejection::TooManyToday { limit: cfg.max_submissions_per_day });
    }
    let gap = cfg.min_gap_ms();
    if let Some(&previous_ms) = history.accepted_end_ms.iter().find(|&&t| (end - t).abs() < gap) {
        return Err(Rejection::TooSoon { previous_ms, min_gap_ms: gap });
    }
    let kind = if today == 0 { SessionKind::FirstOfDay } else { SessionKind::Subsequent };
    let has_psqi = bank().has_psqi_answers(&env.response);
    if has_psqi != (kind == SessionKind::FirstOfDay) {
        return Err(Rejection::WrongSessionKind { expected: kind });
    }
    let response = SurveyResponse { session_kind: kind, answers: env.response.answers.clone() };
    match bank().validate_response(&response) {
        Ok(Completeness::Complete) => Ok(kind),
        Ok(Completeness::Missing(ids)) => Err(Rejection::Incomplete(ids)),
        Err(e) => Err(Rejection::Malformed(e.to_string())),
    }
}
