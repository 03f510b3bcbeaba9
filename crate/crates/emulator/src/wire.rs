//! Newline-delimited text protocol between the emulator and its clients.
//!
//! Server lines:
//!
//! ```text
//! SENSORTAG-EMU v1 <device_id> <profile_name>
//! S <seq> <timestamp_ms> <temp_c> <rh_pct> <hpa> <lux> <db>
//! END <emitted>
//! ERR <message>
//! ```
//!
//! Client lines: `START <rate_hz>`, `STOP`, `SNAPSHOT`. Sample values carry
//! four decimal places. `END` follows a `STOP` once the last sample of the
//! session has been written.

use std::fmt;
use std::str::FromStr;

use wellness_core::SensorSample;

use crate::EmuError;

pub const PROTOCOL_TAG: &str = "SENSORTAG-EMU";
pub const PROTOCOL_VERSION: &str = "v1";
/// Rate used by a bare `START`.
pub const DEFAULT_RATE_HZ: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ServerLine {
    Greeting { device_id: String, profile: String },
    Sample(SensorSample),
    End { emitted: u64 },
    Error(String),
}

pub fn format_sample(s: &SensorSample) -> String {
    format!(
        "S {} {} {:.4} {:.4} {:.4} {:.4} {:.4}",
        s.seq, s.timestamp_ms, s.temperature, s.humidity, s.pressure, s.luminosity, s.audio
    )
}

impl fmt::Display for ServerLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ServerLine::Greeting { device_id, profile } => {
                write!(f, "{PROTOCOL_TAG} {PROTOCOL_VERSION} {device_id} {profile}")
            }
            ServerLine::Sample(s) => f.write_str(&format_sample(s)),
            ServerLine::End { emitted } => write!(f, "END {emitted}"),
            ServerLine::Error(msg) => write!(f, "ERR {msg}"),
        }
    }
}

fn bad(line: &str) -> EmuError {
    EmuError::Protocol(format!("malformed line `{line}`"))
}

impl FromStr for ServerLine {
    type Err = EmuError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let line = line.trim_end_matches(['\r', '\n']);
        let fields: Vec<&str> = line.split(' ').collect();
        match fields.as_slice() {
            [PROTOCOL_TAG, version, device_id, profile] => {
                if *version != PROTOCOL_VERSION {
                    return Err(EmuError::Protocol(format!("unsupported protocol version {version}")));
                }
                Ok(ServerLine::Greeting {
                    device_id: device_id.to_string(),
                    profile: profile.to_string(),
                })
            }
            ["S", seq, ts, t, rh, hpa, lux, db] => {
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
                Ok(ServerLine::Sample(SensorSample {
                    seq: seq.parse().map_err(|_| bad(line))?,
                    timestamp_ms: ts.parse().map_err(|_| bad(line))?,
                    temperature: num(t)?,
                    humidity: num(rh)?,
                    pressure: num(hpa)?,
                    luminosity: num(lux)?,
                    audio: num(db)?,
                }))
            }
            ["END", n] => Ok(ServerLine::End {
                emitted: n.parse().map_err(|_| bad(line))?,
            }),
            ["ERR", ..] => Ok(ServerLine::Error(line[4.min(line.len())..].to_string())),
            _ => Err(bad(line)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Start { rate_hz: f64 },
    Stop,
    Snapshot,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Start { rate_hz } => write!(f, "START {rate_hz}"),
            Command::Stop => f.write_str("STOP"),
            Command::Snapshot => f.write_str("SNAPSHOT"),
        }
    }
}

impl FromStr for Command {
    type Err = EmuError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let line = line.trim();
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["START", rate] => {
                let rate_hz: f64 = rate.parse().map_err(|_| bad(line))?;
                Ok(Command::Start { rate_hz })
            }
            ["START"] => Ok(Command::Start { rate_hz: DEFAULT_RATE_HZ }),
            ["STOP"] => Ok(Command::Stop),
            ["SNAPSHOT"] => Ok(Command::Snapshot),
            _ => Err(bad(line)),
        }
    }
}
