#![allow(dead_code)]

use std::io;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use chrono::NaiveDate;
use wellness_core::journal::SampleRecord;
use wellness_core::survey::AnswerKind;
use wellness_core::{bank, AnswerValue, SensorSample, SessionKind, Submission, SurveyResponse};
use wellness_ingest::storage::Loaded;
use wellness_ingest::{ExperimentConfig, FileStorage, IngestError, Service, Storage, SubmissionEnvelope};

pub const EXP: &str = "exp-spring";
pub const HOUR: i64 = 3_600_000;
/// 2026-03-02T08:00:00Z
pub const DAY0: i64 = 1_772_438_400_000;

pub fn experiments() -> Vec<ExperimentConfig> {
    vec![
        ExperimentConfig::new(EXP, "Spring study", NaiveDate::from_ymd_opt(2026, 3, 1).unwrap(), NaiveDate::from_ymd_opt(2026, 4, 30).unwrap()),
        ExperimentConfig::new("exp-empty", "Nobody here", NaiveDate::from_ymd_opt(2026, 3, 1).unwrap(), NaiveDate::from_ymd_opt(2026, 4, 30).unwrap()),
    ]
}

pub fn response(kind: SessionKind, yes: bool) -> SurveyResponse {
    let mut r = SurveyResponse::new(kind);
    for q in bank().question_set(kind) {
        let v = match q.answer_kind {
            AnswerKind::YesNo => AnswerValue::yes_no(yes),
            AnswerKind::TimeSlot => AnswerValue::Text("11:00pm-11:30pm".into()),
            AnswerKind::HourBin => AnswerValue::Text("6-7".into()),
            AnswerKind::Rating => AnswerValue::Int(4),
            AnswerKind::NonNegativeInt => AnswerValue::Int(1),
        };
        r.answers.insert(q.id.clone(), v);
    }
    r
}

pub fn samples(end_ms: i64, n: u64) -> Vec<SensorSample> {
    (1..=n)
        .map(|seq| SensorSample {
            seq,
            timestamp_ms: end_ms - ((n - seq) as i64) * 1000,
            temperature: 21.0 + seq as f64 * 0.01,
            humidity: 38.5,
            pressure: 1004.25,
            luminosity: 320.0 + seq as f64,
            audio: 47.125,
        })
        .collect()
}

pub fn envelope(key: &str, kind: SessionKind, end_ms: i64) -> SubmissionEnvelope {
    SubmissionEnvelope {
        idempotency_key: key.to_string(),
        response: response(kind, false),
        samples: samples(end_ms, 5),
        client_session_start: end_ms - 5 * 60_000,
        client_session_end: end_ms,
    }
}

/// Wraps file storage and fails submission appends while `fail` is set.
pub struct FlakyStorage {
    pub inner: FileStorage,
    pub fail: Arc<AtomicBool>,
}

impl Storage for FlakyStorage {
    fn append_participant(&self, p: &wellness_ingest::storage::ParticipantRecord) -> io::Result<()> {
        self.inner.append_participant(p)
    }
    fn append_submission(&self, s: &Submission, samples: &SampleRecord) -> io::Result<()> {
        if self.fail.load(Ordering::SeqCst) {
            return Err(io::Error::other("disk unplugged"));
        }
        self.inner.append_submission(s, samples)
    }
    fn load(&self) -> Result<Loaded, IngestError> {
        self.inner.load()
    }
    fn healthy(&self) -> bool {
        !self.fail.load(Ordering::SeqCst) && self.inner.healthy()
    }
}

pub struct Running {
    pub addr: SocketAddr,
    pub service: Arc<Service>,
    task: tokio::task::JoinHandle<()>,
}

impl Running {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub fn stop(self) {
        self.task.abort();
    }
}

pub async fn start_with(storage: Box<dyn Storage>, emulator: Option<String>) -> Running {
    let service = Arc::new(Service::open(experiments(), storage).unwrap().with_emulator(emulator));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let svc = service.clone();
    let task = tokio::spawn(async move {
        wellness_ingest::serve(listener, svc).await.unwrap();
    });
    Running { addr, service, task }
}

pub async fn start(dir: &Path) -> Running {
    start_with(Box::new(FileStorage::open(dir).unwrap()), None).await
}

pub async fn register(client: &reqwest::Client, srv: &Running) -> (String, String) {
    let resp = client
        .post(srv.url("/api/v1/participants"))
        .json(&serde_json::json!({ "experiment_id": EXP }))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 201);
    let v: serde_json::Value = resp.json().await.unwrap();
    (v["participant_id"].as_str().unwrap().into(), v["auth_token"].as_str().unwrap().into())
}

pub async fn post_submission(
    client: &reqwest::Client,
    srv: &Running,
    token: &str,
    env: &SubmissionEnvelope,
) -> (u16, serde_json::Value) {
    let resp = client
        .post(srv.url("/api/v1/submissions"))
        .bearer_auth(token)
        .header("Idempotency-Key", &env.idempotency_key)
        .json(env)
        .send()
        .await
        .unwrap();
    let status = resp.status().as_u16();
    (status, resp.json().await.unwrap())
}

pub fn journal_lines(dir: &Path, name: &str) -> Vec<String> {
    std::fs::read_to_string(dir.join(name)).unwrap().lines().map(str::to_string).collect()
}
