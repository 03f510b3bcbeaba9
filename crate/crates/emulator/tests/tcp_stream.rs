use std::time::{Duration, Instant};

use wellness_core::Variable;
use wellness_emu::client::EmulatorClient;
use wellness_emu::server::{spawn, EmulatorConfig};
use wellness_emu::wire::ServerLine;
use wellness_emu::{EnvironmentProfile, FaultMode};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};

fn config(fault: FaultMode, scale: f64) -> EmulatorConfig {
    let mut c = EmulatorConfig::new(EnvironmentProfile::builtin("indoor-office").unwrap(), fault);
    c.time_scale = scale;
    c.clock_origin_ms = 1_700_000_000_000;
    c
}

#[tokio::test]
async fn real_time_sample_count_matches_rate() {
    let emu = spawn(config(FaultMode::None, 1.0), "127.0.0.1:0").await.unwrap();
    let mut client = EmulatorClient::connect(emu.addr).await.unwrap();
    let rate = 20.0;
    let secs = 1.5;
    let t0 = Instant::now();
    client.start(rate).await.unwrap();
    tokio::time::sleep(Duration::from_secs_f64(secs)).await;
    let samples = client.stop().await.unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let expected = (secs * rate).floor() as i64;
    let got = samples.len() as i64;
    // The stop lands a little after `secs`; allow for the scheduling slack.
    let slack = ((elapsed - secs) * rate).ceil() as i64;
    assert!(got >= expected - 1 && got <= expected + 1 + slack, "got {got}, expected {expected} (elapsed {elapsed:.3}s)");
    for (i, s) in samples.iter().enumerate() {
        assert_eq!(s.seq, i as u64 + 1);
    }
    emu.shutdown();
}

#[tokio::test]
async fn sessions_replay_identically_across_servers() {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let emu = spawn(config(FaultMode::None, 200.0), "127.0.0.1:0").await.unwrap();
        let mut client = EmulatorClient::connect(emu.addr).await.unwrap();
        let a = client.record_session(10.0, 40).await.unwrap();
        let b = client.record_session(10.0, 40).await.unwrap();
        runs.push((a, b));
        emu.shutdown();
    }
    // Timestamps follow the server clock; seq and values follow the seed.
    let strip = |v: &[wellness_core::SensorSample]| {
        v.iter()
            .map(|s| (s.seq, s.temperature, s.humidity, s.pressure, s.luminosity, s.audio))
            .collect::<Vec<_>>()
    };
    assert_eq!(runs[0].0.len(), 40);
    assert_eq!(strip(&runs[0].0), strip(&runs[1].0));
    assert_eq!(strip(&runs[0].1), strip(&runs[1].1));
    // consecutive sessions use different seeds
    let vals = |v: &[wellness_core::SensorSample]| v.iter().map(|s| s.temperature).collect::<Vec<_>>();
    assert_ne!(vals(&runs[0].0), vals(&runs[0].1));
}

#[tokio::test]
async fn zero_battery_over_tcp() {
    let fault = FaultMode::zero([Variable::Humidity]);
    let emu = spawn(config(fault, 500.0), "127.0.0.1:0").await.unwrap();
    let mut client = EmulatorClient::connect(emu.addr).await.unwrap();
    let samples = client.record_session(10.0, 25).await.unwrap();
    assert_eq!(samples.len(), 25);
    assert!(samples.iter().all(|s| s.humidity == 0.0));
    assert!(samples.iter().all(|s| s.temperature != 0.0));
    let snap = client.snapshot().await.unwrap();
    assert_eq!((snap.seq, snap.humidity), (0, 0.0));
    emu.shutdown();
}

#[tokio::test]
async fn greeting_and_error_lines() {
    let emu = spawn(config(FaultMode::None, 1.0), "127.0.0.1:0").await.unwrap();
    let stream = tokio::net::TcpStream::connect(emu.addr).await.unwrap();
    let (r, mut w) = stream.into_split();
    let mut lines = BufReader::new(r).lines();
    let greeting: ServerLine = lines.next_line().await.unwrap().unwrap().parse().unwrap();
    assert_eq!(
        greeting,
        ServerLine::Greeting { device_id: "sensortag-emu-01".into(), profile: "indoor-office".into() }
    );
    w.write_all(b"JUMP 3\nSTART 500\nSTOP\n").await.unwrap();
    let err: ServerLine = lines.next_line().await.unwrap().unwrap().parse().unwrap();
    assert!(matches!(err, ServerLine::Error(_)));
    let err: ServerLine = lines.next_line().await.unwrap().unwrap().parse().unwrap();
    assert!(matches!(err, ServerLine::Error(_)), "rate above 100 Hz is refused");
    let end: ServerLine = lines.next_line().await.unwrap().unwrap().parse().unwrap();
    assert_eq!(end, ServerLine::End { emitted: 0 });
    emu.shutdown();
}
