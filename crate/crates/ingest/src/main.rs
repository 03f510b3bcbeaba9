use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use wellness_ingest::{ExperimentConfig, FileStorage, Service};

fn env(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}

async fn run() -> Result<(), String> {
    let config_path = env("WELLNESS_EXPERIMENT_CONFIG").ok_or("WELLNESS_EXPERIMENT_CONFIG is not set")?;
    let data_dir = PathBuf::from(env("WELLNESS_DATA_DIR").unwrap_or_else(|| "data".into()));
    let port: u16 = env("WELLNESS_PORT")
        .unwrap_or_else(|| "8080".into())
        .parse()
        .map_err(|e| format!("WELLNESS_PORT: {e}"))?;
    let host = env("WELLNESS_HOST").unwrap_or_else(|| "127.0.0.1".into());

    let configs = ExperimentConfig::load(config_path.as_ref()).map_err(|e| e.to_string())?;
    let storage = FileStorage::open(&data_dir).map_err(|e| format!("{}: {e}", data_dir.display()))?;
    let service = Service::open(configs, Box::new(storage))
        .map_err(|e| e.to_string())?
        .with_emulator(env("WELLNESS_EMULATOR_ADDR"));
    let listener = tokio::net::TcpListener::bind((host.as_str(), port))
        .await
        .map_err(|e| format!("bind {host}:{port}: {e}"))?;
    tracing::info!("listening on {}", listener.local_addr().map_err(|e| e.to_string())?);
    tokio::select! {
        r = wellness_ingest::serve(listener, Arc::new(service)) => r.map_err(|e| e.to_string()),
        _ = tokio::signal::ctrl_c() => Ok(()),
    }
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match run().await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
