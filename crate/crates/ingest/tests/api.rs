mod common;

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use common::*;
use wellness_core::journal::{read_sample_records, read_submissions, submission_to_line};
use wellness_core::{bank, SessionKind, ValidityReason, Variable};
use wellness_emu::server::{spawn, EmulatorConfig};
use wellness_emu::{EnvironmentProfile, FaultMode};
use wellness_ingest::storage::{SAMPLES_FILE, SUBMISSIONS_FILE};
use wellness_ingest::FileStorage;

#[tokio::test]
async fn registration_ids_are_unique() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let a = register(&client, &srv).await;
    let b = register(&client, &srv).await;
    assert_ne!(a.0, b.0);
    assert_ne!(a.1, b.1);
    assert_eq!(a.1.len(), 32);

    let resp = client
        .post(srv.url("/api/v1/participants"))
        .json(&serde_json::json!({ "experiment_id": "exp-missing" }))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 404);
    srv.stop();
}

#[tokio::test]
async fn hundred_concurrent_registrations() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let all = futures::future::join_all((0..100).map(|_| register(&client, &srv))).await;
    let tokens: HashSet<_> = all.iter().map(|(_, t)| t.clone()).collect();
    let ids: HashSet<_> = all.iter().map(|(p, _)| p.clone()).collect();
    assert_eq!((tokens.len(), ids.len()), (100, 100));
    assert_eq!(journal_lines(dir.path(), "participants.jsonl").len(), 100);
    srv.stop();
}

#[tokio::test]
async fn daily_flow_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let (_, token) = register(&client, &srv).await;

    let (status, body) = post_submission(&client, &srv, &token, &envelope("a", SessionKind::FirstOfDay, DAY0)).await;
    assert_eq!(status, 201, "{body}");
    assert_eq!(body["validity"], "valid");

    // sleep items are only asked once a day
    let (status, body) = post_submission(&client, &srv, &token, &envelope("b", SessionKind::FirstOfDay, DAY0 + 3 * HOUR)).await;
    assert_eq!((status, body["error"].as_str()), (400, Some("wrong_session_kind")));

    let (status, body) = post_submission(&client, &srv, &token, &envelope("c", SessionKind::Subsequent, DAY0 + HOUR)).await;
    assert_eq!((status, body["error"].as_str()), (409, Some("too_soon")));

    for (key, h) in [("d", 3), ("e", 6)] {
        let (status, body) = post_submission(&client, &srv, &token, &envelope(key, SessionKind::Subsequent, DAY0 + h * HOUR)).await;
        assert_eq!(status, 201, "{body}");
    }
    let (status, body) = post_submission(&client, &srv, &token, &envelope("f", SessionKind::Subsequent, DAY0 + 9 * HOUR)).await;
    assert_eq!((status, body["error"].as_str()), (409, Some("too_many_today")));

    // next local day starts over with the sleep items
    let (status, _) = post_submission(&client, &srv, &token, &envelope("g", SessionKind::FirstOfDay, DAY0 + 24 * HOUR)).await;
    assert_eq!(status, 201);
    assert_eq!(journal_lines(dir.path(), SUBMISSIONS_FILE).len(), 4);
    srv.stop();
}

#[tokio::test]
async fn bad_token_and_malformed_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let (_, token) = register(&client, &srv).await;

    let env = envelope("k", SessionKind::FirstOfDay, DAY0);
    let (status, body) = post_submission(&client, &srv, "feedface", &env).await;
    assert_eq!((status, body["error"].as_str()), (401, Some("bad_token")));

    // a bad token is reported before a bad body
    let resp = client
        .post(srv.url("/api/v1/submissions"))
        .bearer_auth("feedface")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 401);

    let resp = client
        .post(srv.url("/api/v1/submissions"))
        .bearer_auth(&token)
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);

    let mut env = envelope("k", SessionKind::FirstOfDay, DAY0);
    env.response.answers.remove("pss_anger");
    env.response.answers.remove("people_count");
    let (status, body) = post_submission(&client, &srv, &token, &env).await;
    assert_eq!((status, body["error"].as_str()), (400, Some("incomplete")));
    assert_eq!(body["missing"], serde_json::json!(["pss_anger", "people_count"]));

    let resp = client
        .post(srv.url("/api/v1/submissions"))
        .bearer_auth(&token)
        .header("Idempotency-Key", "other")
        .json(&envelope("k", SessionKind::FirstOfDay, DAY0))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), 400);
    assert!(journal_lines(dir.path(), SUBMISSIONS_FILE).is_empty());
    srv.stop();
}

#[tokio::test]
async fn replay_returns_original_id() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let (_, token) = register(&client, &srv).await;
    let env = envelope("retry-me", SessionKind::FirstOfDay, DAY0);
    let (s1, b1) = post_submission(&client, &srv, &token, &env).await;
    let before = journal_lines(dir.path(), SUBMISSIONS_FILE).len();
    let (s2, b2) = post_submission(&client, &srv, &token, &env).await;
    assert_eq!((s1, s2), (201, 200));
    assert_eq!(b1["submission_id"], b2["submission_id"]);
    assert_eq!(journal_lines(dir.path(), SUBMISSIONS_FILE).len(), before);
    srv.stop();
}

#[tokio::test]
async fn storage_failure_is_503_and_retry_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let fail = Arc::new(AtomicBool::new(false));
    let storage = FlakyStorage { inner: FileStorage::open(dir.path()).unwrap(), fail: fail.clone() };
    let srv = start_with(Box::new(storage), None).await;
    let client = reqwest::Client::new();
    let (_, token) = register(&client, &srv).await;

    fail.store(true, Ordering::SeqCst);
    let env = envelope("flaky", SessionKind::FirstOfDay, DAY0);
    let (status, body) = post_submission(&client, &srv, &token, &env).await;
    assert_eq!((status, body["error"].as_str()), (503, Some("storage_failure")));
    assert_eq!(client.get(srv.url("/api/v1/healthz")).send().await.unwrap().status(), 503);

    fail.store(false, Ordering::SeqCst);
    let (status, _) = post_submission(&client, &srv, &token, &env).await;
    assert_eq!(status, 201, "rules state untouched by the failed attempt");
    assert_eq!(client.get(srv.url("/api/v1/healthz")).send().await.unwrap().status(), 200);
    assert_eq!(journal_lines(dir.path(), SUBMISSIONS_FILE).len(), 1);
    srv.stop();
}

#[tokio::test]
async fn dataset_export_filters_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let (_, token) = register(&client, &srv).await;

    let mut keys = Vec::new();
    for day in 0..2 {
        for slot in 0..3 {
            if keys.len() == 5 {
                break;
            }
            let end = DAY0 + day * 24 * HOUR + slot * 3 * HOUR;
            let kind = if slot == 0 { SessionKind::FirstOfDay } else { SessionKind::Subsequent };
            let mut env = envelope(&format!("k{day}{slot}"), kind, end);
            if keys.len() == 2 {
                for s in &mut env.samples {
                    s.humidity = 0.0;
                }
            }
            let (status, body) = post_submission(&client, &srv, &token, &env).await;
            assert_eq!(status, 201, "{body}");
            keys.push(body["submission_id"].as_str().unwrap().to_string());
        }
    }
    let get = |inv: bool| {
        let url = srv.url(&format!("/api/v1/experiments/{EXP}/dataset?include_invalid={inv}"));
        let client = client.clone();
        async move { client.get(url).send().await.unwrap().text().await.unwrap() }
    };
    let valid = read_submissions(get(false).await.as_bytes()).unwrap();
    let all = read_submissions(get(true).await.as_bytes()).unwrap();
    assert_eq!((valid.len(), all.len()), (4, 5));
    let invalid = &all[2];
    assert_eq!(invalid.validity.reason(), Some(ValidityReason::ZeroReadingSensor(Variable::Humidity)));
    assert_eq!(all.iter().map(|s| s.submission_id.clone()).collect::<Vec<_>>(), keys);
    assert!(all.iter().all(|s| s.question_bank_hash == bank().content_hash()));

    let empty = client.get(srv.url("/api/v1/experiments/exp-empty/dataset")).send().await.unwrap();
    assert_eq!(empty.status(), 200);
    assert!(empty.text().await.unwrap().is_empty());
    let missing = client.get(srv.url("/api/v1/experiments/nope/dataset")).send().await.unwrap();
    assert_eq!(missing.status(), 404);

    let samples = read_sample_records(std::fs::read(dir.path().join(SAMPLES_FILE)).unwrap().as_slice()).unwrap();
    assert_eq!(samples.len(), 5);
    assert_eq!(samples[0].submission_id, keys[0]);
    srv.stop();
}

#[tokio::test]
async fn restart_replays_journals_byte_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let client = reqwest::Client::new();
    let srv = start(dir.path()).await;
    let (_, token) = register(&client, &srv).await;
    let first = envelope("one", SessionKind::FirstOfDay, DAY0);
    let (_, b1) = post_submission(&client, &srv, &token, &first).await;
    post_submission(&client, &srv, &token, &envelope("two", SessionKind::Subsequent, DAY0 + 4 * HOUR)).await;
    let url = srv.url(&format!("/api/v1/experiments/{EXP}/dataset?include_invalid=true"));
    let export_before = client.get(&url).send().await.unwrap().text().await.unwrap();
    let journal_before = std::fs::read_to_string(dir.path().join(SUBMISSIONS_FILE)).unwrap();
    srv.stop();

    let srv = start(dir.path()).await;
    let url = srv.url(&format!("/api/v1/experiments/{EXP}/dataset?include_invalid=true"));
    let export_after = client.get(&url).send().await.unwrap().text().await.unwrap();
    assert_eq!(export_after, export_before);
    assert_eq!(export_after, journal_before);
    let reparsed = read_submissions(journal_before.as_bytes()).unwrap();
    let rewritten: String = reparsed.iter().map(|s| submission_to_line(s) + "\n").collect();
    assert_eq!(rewritten, journal_before);

    // token, idempotency and rule state survive the restart
    let (status, b2) = post_submission(&client, &srv, &token, &first).await;
    assert_eq!((status, &b2["submission_id"]), (200, &b1["submission_id"]));
    let (status, body) = post_submission(&client, &srv, &token, &envelope("three", SessionKind::Subsequent, DAY0 + 5 * HOUR)).await;
    assert_eq!((status, body["error"].as_str()), (409, Some("too_soon")));
    srv.stop();
}

#[tokio::test]
async fn question_bank_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let srv = start(dir.path()).await;
    let client = reqwest::Client::new();
    let v: serde_json::Value = client.get(srv.url("/api/v1/questions")).send().await.unwrap().json().await.unwrap();
    assert_eq!(v["content_hash"], bank().content_hash());
    assert_eq!(v["questions"].as_array().unwrap().len(), 37);
    let v: serde_json::Value = client
        .get(srv.url("/api/v1/questions?session_kind=subsequent"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(v["questions"].as_array().unwrap().len(), 21);
    srv.stop();
}

#[tokio::test]
async fn sensor_snapshot_proxy() {
    let dir = tempfile::tempdir().unwrap();
    let client = reqwest::Client::new();
    let srv = start(dir.path()).await;
    let resp = client.get(srv.url("/api/v1/sensor/snapshot")).send().await.unwrap();
    assert_eq!(resp.status(), 503);
    srv.stop();

    let profile = EnvironmentProfile::constant("bench", 21.5, 40.0, 1001.0, 250.0, 44.0);
    let emu = spawn(EmulatorConfig::new(profile, FaultMode::None), "127.0.0.1:0").await.unwrap();
    let srv = start_with(Box::new(FileStorage::open(dir.path()).unwrap()), Some(emu.addr.to_string())).await;
    let v: serde_json::Value = client.get(srv.url("/api/v1/sensor/snapshot")).send().await.unwrap().json().await.unwrap();
    assert_eq!((v["seq"].as_u64(), v["temperature"].as_f64(), v["luminosity"].as_f64()), (Some(0), Some(21.5), Some(250.0)));
    srv.stop();
    emu.shutdown();
}
