use std::process::ExitCode;

use clap::Parser;
use wellness_emu::server::{self, EmulatorConfig};
use wellness_emu::{EnvironmentProfile, FaultMode};

/// Serve a simulated sensor board over TCP.
#[derive(Parser, Debug)]
#[command(name = "wellness-emu", version)]
struct Args {
    /// Builtin profile name or path to a JSON profile.
    #[arg(long, default_value = "indoor-office")]
    profile: String,
    /// none, zero:<var,...|all> or drop:<p>
    #[arg(long, default_value = "none")]
    fault: FaultMode,
    /// Overrides the profile seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: String,
    /// Virtual seconds per wall-clock second.
    #[arg(long, default_value_t = 1.0)]
    speedup: f64,
    #[arg(long, default_value = "sensortag-emu-01")]
    device_id: String,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let args = Args::parse();
    let mut profile = match EnvironmentProfile::resolve(&args.profile) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        profile.seed = seed;
    }
    if !(args.speedup > 0.0 && args.speedup.is_finite()) {
        eprintln!("error: --speedup must be positive");
        return ExitCode::from(2);
    }
    let mut config = EmulatorConfig::new(profile, args.fault);
    config.time_scale = args.speedup;
    config.device_id = args.device_id;
    let listener = match tokio::net::TcpListener::bind(&args.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {}: {e}", args.listen);
            return ExitCode::from(1);
        }
    };
    match listener.local_addr() {
        Ok(addr) => tracing::info!("listening on {addr}"),
        Err(_) => tracing::info!("listening on {}", args.listen),
    }
    server::serve(listener, config).await;
    ExitCode::SUCCESS
}
