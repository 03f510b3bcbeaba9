//! Emulator for an environmental sensor board. Generates reproducible sample
//! streams from a profile and serves them over a newline-delimited TCP
//! protocol.

pub mod generator;
pub mod profile;
pub mod wire;

#[cfg(feature = "server")]
pub mod client;
#[cfg(feature = "server")]
pub mod server;

use thiserror::Error;

pub use generator::{draw_values, snapshot, FaultMode, SampleGenerator};
pub use profile::{EnvironmentProfile, Shape, VariableGenerator, BUILTIN_PROFILES};

#[derive(Debug, Error)]
pub enum EmuError {
    #[error("profile: {0}")]
    Profile(String),
    #[error("fault: {0}")]
    Fault(String),
    #[error("sampling rate {0} Hz outside (0, 100]")]
    Rate(f64),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
