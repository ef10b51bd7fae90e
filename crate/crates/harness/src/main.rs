use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use xrsim_harness::{load_report, replay, run_session, SessionConfig, SessionReport};

#[derive(Parser)]
#[command(name = "xrsim", version, about = "Run, replay and inspect simulated XR sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a session and write its artifacts to the output directory.
    Run {
        /// TOML session configuration. Defaults are used when omitted.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Override a configuration value, e.g. `--set vio.latency_ms=80`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(short, long, default_value = "session")]
        out: PathBuf,
    },
    /// Re-analyse a recorded session directory into a new output directory.
    Replay {
        dataset: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the report stored in a session directory.
    Report { dir: PathBuf },
    /// Check a configuration and print it with all defaults filled in.
    ValidateConfig {
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn load_config(path: Option<&PathBuf>, overrides: &[String]) -> Result<SessionConfig> {
    let base = match path {
        Some(p) => SessionConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => SessionConfig::default(),
    };
    let config = base.with_overrides(overrides)?;
    config.validate()?;
    Ok(config)
}

fn finish(report: &SessionReport) -> ExitCode {
    print!("{}", report.summary());
    if report.is_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides, out } => {
            let config = load_config(config.as_ref(), &overrides)?;
            let report = run_session(&config, &out)?;
            Ok(finish(&report))
        }
        Command::Replay { dataset, out } => {
            let report = replay(&dataset, &out)?;
            Ok(finish(&report))
        }
        Command::Report { dir } => {
            let report = load_report(&dir)?;
            Ok(finish(&report))
        }
        Command::ValidateConfig { config, overrides } => {
            let config = load_config(config.as_ref(), &overrides)?;
            print!("{}", config.to_toml_string()?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
