//! Command-line front end: config parsing, checkpoints, the CSV time
//! series and the `run`, `check`, `mms` and `info` commands.

mod check;
mod checkpoint;
mod config;
mod run;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use check::{check_identities, check_state, info, mms_plan, run_mms, CheckReport, IdentityLine};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError, HEADER_LEN, MAGIC, VERSION};
pub use config::{parse_config, parse_config_with, render_config, ConfigError, InitKind, RunConfig, KEYS};
pub use run::{csv_header, csv_row, csv_values, initial_state, run_simulation, RunSummary, CSV_COLUMNS};

pub const EXIT_OK: i32 = 0;
/// A `check` or `mms` target was missed.
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Checkpoint {
        path: PathBuf,
        #[source]
        source: CheckpointError,
    },
    #[error(transparent)]
    Setup(crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Setup(e) if e.is_numerical_abort() => EXIT_ABORT,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vela", version, about = "Pseudo-spectral viscoelastic flow simulator and identity checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by the config-driven commands.
#[derive(Debug, Clone, clap::Args)]
pub struct ConfigArgs {
    /// Config file of `key = value` lines; defaults apply when omitted.
    pub config: Option<PathBuf>,
    /// Extra `key=value` setting, applied after the file.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate in time, writing the CSV series and a final checkpoint.
    Run(ConfigArgs),
    /// Temporal and spatial convergence study against a manufactured solution.
    Mms(ConfigArgs),
    /// Evaluate the structural identities of the initial state or a checkpoint.
    Check {
        #[command(flatten)]
        args: ConfigArgs,
        /// Check this checkpoint instead of the configured initial state.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Describe a checkpoint file.
    Info { checkpoint: PathBuf },
    /// Print the effective configuration.
    Config(ConfigArgs),
}

/// Reads and parses the config named by `args`.
pub fn load_config(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    Ok(parse_config_with(&text, &args.set)?)
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    let stdout_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match command {
        Command::Run(args) => {
            let cfg = load_config(args)?;
            let summary = run_simulation(&cfg)?;
            match &summary.abort {
                None => writeln!(
                    out,
                    "completed {} steps to t = {}; wrote {} rows to {} and {}",
                    summary.steps,
                    summary.final_time,
                    summary.rows,
                    cfg.csv_path.display(),
                    cfg.checkpoint_path.display()
                ),
                Some(reason) => writeln!(out, "step {}: {reason}", summary.steps),
            }
            .map_err(stdout_err)?;
            Ok(summary.exit_code())
        }
        Command::Mms(args) => {
            let cfg = load_config(args)?;
            let (text, ok) = run_mms(&cfg)?;
            out.write_all(text.as_bytes()).map_err(stdout_err)?;
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Check { args, checkpoint } => {
            let cfg = load_config(args)?;
            let report = check_identities(&cfg, checkpoint.as_deref())?;
            out.write_all(report.render().as_bytes()).map_err(stdout_err)?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Info { checkpoint } => {
            out.write_all(info(checkpoint)?.as_bytes()).map_err(stdout_err)?;
            Ok(EXIT_OK)
        }
        Command::Config(args) => {
            let cfg = load_config(args)?;
            out.write_all(render_config(&cfg).as_bytes()).map_err(stdout_err)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs a parsed command line and returns the process exit code. Errors
/// are reported on stderr.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> i32 {
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
