//! `conestab` command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 acceptance
//! suite failure.

use std::io;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod plot;

use config::{CommandKind, CommonArgs, Extras, Probe, Range, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(conestab::Error),
    Io(String),
}

impl From<conestab::Error> for CliError {
    fn from(e: conestab::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "conestab",
    version,
    about = "Linearized Sobolev spectra and local stability constants on cones"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ordered eigenvalues with shooting residuals.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of eigenvalues [default: 6].
        #[arg(long)]
        count: Option<usize>,
    },
    /// The local constant c_* and the branch it comes from.
    Constant {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// c_* and the first three eigenvalues over a lambda1 grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Inclusive `start:end:step`.
        #[arg(long)]
        lambda1_range: Option<Range>,
    },
    /// Deficit, distance and their quotient for a named probe function.
    Deficit {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        probe: Option<Probe>,
        /// Perturbation size [default: 0.01].
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Run the acceptance suite; exits with 3 if any criterion fails.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Weighted Hardy inequality on built-in test functions.
    Hardy {
        #[command(flatten)]
        common: CommonArgs,
        /// Weight exponent [default: 0].
        #[arg(long)]
        eps: Option<f64>,
    },
}

fn resolve(command: Command) -> Result<RunConfig, String> {
    let (kind, common, extras) = match command {
        Command::Spectrum { common, count } => (
            CommandKind::Spectrum,
            common,
            Extras {
                count,
                ..Default::default()
            },
        ),
        Command::Constant { common } => (CommandKind::Constant, common, Extras::default()),
        Command::Sweep {
            common,
            lambda1_range,
        } => (
            CommandKind::Sweep,
            common,
            Extras {
                lambda1_range,
                ..Default::default()
            },
        ),
        Command::Deficit {
            common,
            probe,
            amplitude,
        } => (
            CommandKind::Deficit,
            common,
            Extras {
                probe,
                amplitude,
                ..Default::default()
            },
        ),
        Command::Verify { common } => (CommandKind::Verify, common, Extras::default()),
        Command::Hardy { common, eps } => (
            CommandKind::Hardy,
            common,
            Extras {
                eps,
                ..Default::default()
            },
        ),
    };
    RunConfig::resolve(kind, common, extras)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(cli.command) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error: {} in {}: {e}", e.name(), e.module());
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
