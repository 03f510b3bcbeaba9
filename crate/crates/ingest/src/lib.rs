//! Ingestion service: participant registration, protocol-checked survey and
//! sensor submissions, append-only journals and dataset export.

pub mod config;
pub mod http;
pub mod protocol;
pub mod service;
pub mod storage;

use std::sync::Arc;

use thiserror::Error;
use tokio::net::TcpListener;

pub use config::ExperimentConfig;
pub use protocol::{Rejection, SubmissionEnvelope};
pub use service::{Registration, Service, SubmitError, SubmitOutcome};
pub use storage::{FileStorage, Storage};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("config: {0}")]
    Config(String),
    #[error("journal: {0}")]
    Journal(String),
    #[error("no sensor emulator configured")]
    NoEmulator,
    #[error("sensor emulator: {0}")]
    Emulator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serves the API on `listener` until the future is dropped.
pub async fn serve(listener: TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    axum::serve(listener, http::router(service)).await
}
