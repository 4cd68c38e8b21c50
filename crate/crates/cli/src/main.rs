//! `exceed`: synthesize or ingest a series, prepare the supervised dataset,
//! train per-horizon models, forecast exceedance probabilities and run the
//! cross-validated benchmark.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exceed_core::Error;

#[derive(Parser)]
#[command(name = "exceed", version, about = "Exceedance probability forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the synthetic generator and the cross-validation splits.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated horizons, overriding the configuration.
    #[arg(long, global = true, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic series as CSV.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Embed the series, set the threshold and store the dataset.
    Prepare {
        #[command(flatten)]
        common: Common,
    },
    /// Fit one model per method and horizon on the prepared dataset.
    Train {
        #[command(flatten)]
        common: Common,
        /// Train only this method.
        #[arg(long)]
        method: Option<String>,
    },
    /// Forecast from trained models at one origin of the series.
    Forecast {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: String,
        /// Origin row index of the series, or `latest`.
        #[arg(long, default_value = "latest")]
        at: String,
        /// Comma-separated, strictly increasing thresholds for an exceedance curve.
        #[arg(long, value_delimiter = ',')]
        curve: Option<Vec<f64>>,
    },
    /// Run the Monte Carlo cross-validated benchmark.
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::DegenerateTarget(_)) => 3,
        Some(
            Error::Config(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Schema(_)
            | Error::Format(_)
            | Error::Ordering(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { common } => commands::synth(&common),
        Command::Prepare { common } => commands::prepare(&common),
        Command::Train { common, method } => commands::train(&common, method.as_deref()),
        Command::Forecast { common, method, at, curve } => commands::forecast(&common, &method, &at, curve.as_deref()),
        Command::Evaluate { common } => commands::evaluate(&common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
