//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 numerical
//! failure, 4 an oracle verdict failed.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::model::ModelError;
use crate::oracle::Suite;
use crate::rates::RateError;
use config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Usage(_) => EXIT_CONFIG,
            Self::Model(_) | Self::Rate(_) => EXIT_NUMERICAL,
            Self::Dynamics(DynamicsError::Domain { .. } | DynamicsError::Model(_)) => EXIT_CONFIG,
            Self::Dynamics(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "quasidamp",
    version,
    about = "Quasiparticle damping and squeezing in driven condensates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Beliaev and Landau rates over the configured grid.
    Rates {
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: QUASIDAMP_THREADS, then all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Driven pair-creation dynamics and spin squeezing.
    Dynamics {
        #[command(flatten)]
        common: Common,
        /// Force gamma = 0.
        #[arg(long)]
        no_damping: bool,
    },
    /// Independent reference checks.
    Oracle {
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        #[arg(long, default_value = config::DEFAULT_OUTPUT_DIR)]
        out: PathBuf,
    },
    /// Bogoliubov spectrum at the configured momenta.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Markov,
    Wick,
    All,
}

impl From<Which> for Suite {
    fn from(w: Which) -> Self {
        match w {
            Which::Markov => Suite::Markov,
            Which::Wick => Suite::Wick,
            Which::All => Suite::All,
        }
    }
}

fn out_dir(common: &Common, cfg: &config::RunConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| cfg.output.directory.clone())
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Rates { common, threads } => {
            let cfg = config::load_config(&common.config)?;
            let threads = match threads {
                Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
                Some(n) => Some(n),
                None => commands::threads_from_env()?,
            };
            commands::cmd_rates(&cfg, &out_dir(&common, &cfg), threads)?;
        }
        Command::Dynamics { common, no_damping } => {
            let cfg = config::load_config(&common.config)?;
            commands::cmd_dynamics(&cfg, &out_dir(&common, &cfg), no_damping)?;
        }
        Command::Oracle { which, out } => {
            let verdicts = commands::cmd_oracle(&out, which.into())?;
            for v in &verdicts {
                let status = if v.pass { "PASS" } else { "FAIL" };
                println!("{status} {}", v.name);
            }
            if verdicts.iter().any(|v| !v.pass) {
                return Ok(EXIT_ORACLE);
            }
        }
        Command::Spectrum { common } => {
            let cfg = config::load_config(&common.config)?;
            commands::cmd_spectrum(&cfg, &out_dir(&common, &cfg))?;
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
