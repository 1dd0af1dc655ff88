//! `vet`: headless runs of the simulator, the gateway service, replays and exports.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vet_core::protocol::DEFAULT_PORT;

#[derive(Debug, Parser)]
#[command(
    name = "vet",
    version,
    about = "Visuo-electrotactile sensing and stimulation simulator"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a press scenario and run it through the perception pipeline.
    Simulate {
        /// Scenario JSON; a built-in sliding press is used otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Zone-sensitivity experiment with synthetic participants.
    Experiment {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Flight game flown by the scripted pilot.
    Game {
        /// Session length, s.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Band-following and open-loop grasping on random objects.
    Teleop {
        #[arg(long, default_value_t = 20)]
        objects: usize,
    },
    /// Simulated device on `--port` plus the WebSocket gateway on $VET_GATEWAY_ADDR.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Bridge an already running device at this address instead.
        #[arg(long)]
        device: Option<String>,
    },
    /// Re-run a session log and check it reproduces exactly.
    Replay { log: PathBuf },
    /// Convert a session log into CSV tables.
    Export { log: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let default_level = if matches!(cli.command, Command::Serve { .. }) {
        "info"
    } else {
        "warn"
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
