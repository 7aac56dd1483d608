use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parareal_lab::experiment::{
    emit_table, read_report, run_experiment, ExperimentConfig, ExperimentError,
};

/// Log filter, e.g. `PARAREAL_LAB_LOG=debug`.
const LOG_ENV: &str = "PARAREAL_LAB_LOG";

#[derive(Parser)]
#[command(
    name = "parareal-lab",
    version,
    about = "Synchronous and asynchronous Parareal experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured mode and write summary.csv and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-run traces under <out>/traces.
        #[arg(long)]
        traces: bool,
        /// Replace schedule seeds with N, N+1, ...
        #[arg(long, value_name = "N")]
        seed_override: Option<u64>,
    },
    /// Turn a run directory into a Table-1 style CSV.
    Table {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, ExperimentError> {
    match command {
        Command::Run {
            config,
            out,
            traces,
            seed_override,
        } => {
            let mut config = ExperimentConfig::from_path(&config)?;
            if let Some(base) = seed_override {
                config.override_seeds(base);
            }
            let outcome = run_experiment(&config, &out, traces)?;
            if outcome.all_converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("some asynchronous runs did not converge within their horizon");
                Ok(ExitCode::from(2))
            }
        }
        Command::Table { input, out } => {
            let report = read_report(&input)?;
            let text = emit_table(&report.rows)?;
            std::fs::write(&out, text)
                .map_err(|source| ExperimentError::Io { path: out, source })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
