use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::time::Instant;

use crate::generator::{snapshot, FaultMode, SampleGenerator};
use crate::profile::EnvironmentProfile;
use crate::wire::{format_sample, Command, ServerLine};
use crate::EmuError;

#[derive(Debug, Clone)]
pub struct EmulatorConfig {
    pub device_id: String,
    pub profile: EnvironmentProfile,
    pub fault: FaultMode,
    /// Virtual seconds per wall-clock second; 1.0 streams in real time.
    pub time_scale: f64,
    /// Virtual clock reading when the server starts.
    pub clock_origin_ms: i64,
}

impl EmulatorConfig {
    pub fn new(profile: EnvironmentProfile, fault: FaultMode) -> Self {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as i64).unwrap_or(0);
        Self {
            device_id: "sensortag-emu-01".into(),
            profile,
            fault,
            time_scale: 1.0,
            clock_origin_ms: now,
        }
    }
}

struct Shared {
    config: EmulatorConfig,
    started: Instant,
    sessions: AtomicU64,
}

impl Shared {
    fn virtual_now_ms(&self) -> i64 {
        let elapsed = self.started.elapsed().as_secs_f64() * self.config.time_scale;
        self.config.clock_origin_ms + (elapsed * 1000.0).round() as i64
    }

    /// Every session draws from its own seed: profile seed + session index.
    fn session_profile(&self) -> EnvironmentProfile {
        let n = self.sessions.fetch_add(1, Ordering::Relaxed);
        let mut p = self.config.profile.clone();
        p.seed = p.seed.wrapping_add(n);
        p
    }
}

/// A running emulator. Dropping the handle does not stop the accept loop;
/// call [`EmulatorHandle::shutdown`].
pub struct EmulatorHandle {
    pub addr: SocketAddr,
    task: tokio::task::JoinHandle<()>,
}

impl EmulatorHandle {
    pub fn shutdown(self) {
        self.task.abort();
    }
}

pub async fn spawn(config: EmulatorConfig, listen: &str) -> Result<EmulatorHandle, EmuError> {
    let listener = TcpListener::bind(listen).await?;
    let addr = listener.local_addr()?;
    let task = tokio::spawn(serve(listener, config));
    Ok(EmulatorHandle { addr, task })
}

pub async fn serve(listener: TcpListener, config: EmulatorConfig) {
    let shared = Arc::new(Shared {
        config,
        started: Instant::now(),
        sessions: AtomicU64::new(0),
    });
    loop {
        let (socket, peer) = match listener.accept().await {
            Ok(c) => c,
            Err(e) => {
                tracing::warn!("accept failed: {e}");
                continue;
            }
        };
        let shared = shared.clone();
        tokio::spawn(async move {
            if let Err(e) = handle_connection(socket, shared).await {
                tracing::debug!("connection {peer} ended: {e}");
            }
        });
    }
}

struct Streaming {
    generator: SampleGenerator,
    rate_hz: f64,
    started: Instant,
    periods: u64,
    emitted: u64,
}

impl Streaming {
    /// Periods due by now in virtual time.
    fn due(&self, time_scale: f64) -> u64 {
        (self.started.elapsed().as_secs_f64() * time_scale * self.rate_hz).floor() as u64
    }

    fn drain_due(&mut self, time_scale: f64) -> String {
        let due = self.due(time_scale);
        let mut out = String::new();
        while self.periods < due {
            self.periods += 1;
            if let Some(sample) = self.generator.step() {
                self.emitted += 1;
                out.push_str(&format_sample(&sample));
                out.push('\n');
            }
        }
        out
    }
}

async fn handle_connection(socket: TcpStream, shared: Arc<Shared>) -> Result<(), EmuError> {
    let (read, mut write) = socket.into_split();
    let mut lines = BufReader::new(read).lines();
    let greeting = ServerLine::Greeting {
        device_id: shared.config.device_id.clone(),
        profile: shared.config.profile.name.clone(),
    };
    write.write_all(format!("{greeting}\n").as_bytes()).await?;

    let scale = shared.config.time_scale;
    let mut stream: Option<Streaming> = None;
    let mut tick = tokio::time::interval(Duration::from_millis(1));
    tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);

    loop {
        tokio::select! {
            line = lines.next_line() => {
                let Some(line) = line? else { return Ok(()) };
                if line.trim().is_empty() {
                    continue;
                }
                let reply = match line.parse::<Command>() {
                    Ok(Command::Start { rate_hz }) => {
                        let origin = shared.virtual_now_ms();
                        match SampleGenerator::new(shared.session_profile(), shared.config.fault.clone(), rate_hz, origin) {
                            Ok(generator) => {
                                let period = Duration::from_secs_f64(1.0 / (rate_hz * scale)).max(Duration::from_millis(1));
                                tick = tokio::time::interval(period);
                                tick.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
                                stream = Some(Streaming { generator, rate_hz, started: Instant::now(), periods: 0, emitted: 0 });
                                None
                            }
                            Err(e) => Some(ServerLine::Error(e.to_string()).to_string()),
                        }
                    }
                    Ok(Command::Stop) => {
                        // Flush whatever came due before the stop request.
                        let mut out = String::new();
                        let emitted = match stream.take() {
                            Some(mut s) => {
                                out = s.drain_due(scale);
                                s.emitted
                            }
                            None => 0,
                        };
                        out.push_str(&ServerLine::End { emitted }.to_string());
                        Some(out)
                    }
                    Ok(Command::Snapshot) => {
                        let s = snapshot(&shared.config.profile, &shared.config.fault, shared.virtual_now_ms());
                        Some(format_sample(&s))
                    }
                    Err(e) => Some(ServerLine::Error(e.to_string()).to_string()),
                };
                if let Some(reply) = reply {
                    write.write_all(format!("{reply}\n").as_bytes()).await?;
                }
            }
            _ = tick.tick(), if stream.is_some() => {
                let s = stream.as_mut().expect("guarded by select condition");
                let out = s.drain_due(scale);
                if !out.is_empty() {
                    write.write_all(out.as_bytes()).await?;
                }
            }
        }
    }
}
