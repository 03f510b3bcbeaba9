use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::{TcpStream, ToSocketAddrs};
use wellness_core::SensorSample;

use crate::wire::{Command, ServerLine};
use crate::EmuError;

pub struct EmulatorClient {
    lines: Lines<BufReader<OwnedReadHalf>>,
    write: OwnedWriteHalf,
    pub device_id: String,
    pub profile: String,
}

impl EmulatorClient {
    pub async fn connect(addr: impl ToSocketAddrs) -> Result<Self, EmuError> {
        let (read, write) = TcpStream::connect(addr).await?.into_split();
        let mut lines = BufReader::new(read).lines();
        let first = next_line(&mut lines).await?;
        match first {
            ServerLine::Greeting { device_id, profile } => Ok(Self { lines, write, device_id, profile }),
            other => Err(EmuError::Protocol(format!("expected greeting, got `{other}`"))),
        }
    }

    async fn send(&mut self, cmd: Command) -> Result<(), EmuError> {
        self.write.write_all(format!("{cmd}\n").as_bytes()).await?;
        Ok(())
    }

    pub async fn start(&mut self, rate_hz: f64) -> Result<(), EmuError> {
        self.send(Command::Start { rate_hz }).await
    }

    /// Reads the next sample; `None` once the server closes the session.
    pub async fn next_sample(&mut self) -> Result<Option<SensorSample>, EmuError> {
        match next_line(&mut self.lines).await? {
            ServerLine::Sample(s) => Ok(Some(s)),
            ServerLine::End { .. } => Ok(None),
            ServerLine::Error(e) => Err(EmuError::Protocol(e)),
            other => Err(EmuError::Protocol(format!("unexpected `{other}`"))),
        }
    }

    /// Sends STOP and collects the remaining samples up to END.
    pub async fn stop(&mut self) -> Result<Vec<SensorSample>, EmuError> {
        self.send(Command::Stop).await?;
        let mut out = Vec::new();
        loop {
            match next_line(&mut self.lines).await? {
                ServerLine::Sample(s) => out.push(s),
                ServerLine::End { .. } => return Ok(out),
                ServerLine::Error(e) => return Err(EmuError::Protocol(e)),
                other => return Err(EmuError::Protocol(format!("unexpected `{other}`"))),
            }
        }
    }

    /// Streams for `periods` sample periods, then stops and returns every
    /// sample received.
    pub async fn record_session(&mut self, rate_hz: f64, periods: u64) -> Result<Vec<SensorSample>, EmuError> {
        self.start(rate_hz).await?;
        let mut out = Vec::new();
        let mut last_seq = 0;
        while last_seq < periods {
            match self.next_sample().await? {
                Some(s) => {
                    last_seq = s.seq;
                    out.push(s);
                }
                None => return Ok(out),
            }
        }
        out.extend(self.stop().await?);
        out.retain(|s| s.seq <= periods);
        Ok(out)
    }

    pub async fn snapshot(&mut self) -> Result<SensorSample, EmuError> {
        self.send(Command::Snapshot).await?;
        match next_line(&mut self.lines).await? {
            ServerLine::Sample(s) => Ok(s),
            ServerLine::Error(e) => Err(EmuError::Protocol(e)),
            other => Err(EmuError::Protocol(format!("unexpected `{other}`"))),
        }
    }
}

async fn next_line(lines: &mut Lines<BufReader<OwnedReadHalf>>) -> Result<ServerLine, EmuError> {
    match lines.next_line().await? {
        Some(line) => line.parse(),
        None => Err(EmuError::Protocol("connection closed".into())),
    }
}
