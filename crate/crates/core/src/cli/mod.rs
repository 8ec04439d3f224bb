//! Command-line experiment runner.
//!
//! Every subcommand writes its data files and a `manifest.json` into
//! `--out-dir`. Exit codes: 0 success, 2 invalid arguments, 3 numerical
//! failure (including a violated post-condition check), 1 I/O errors.

mod commands;
pub mod manifest;
pub mod render;
pub mod table;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::dynamics::NoiseKind;
use crate::error::Error;
use crate::integrate::Method;
pub use manifest::RunManifest;
pub use table::{Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "inertia", version, about = "Computational-inertia experiments for second-order optimization dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inertia over time for the frictionless and the damped 1D quadratic.
    Conserve {
        #[command(flatten)]
        common: CommonArgs,
        /// Run only the frictionless case.
        #[arg(long)]
        gamma0_only: bool,
    },
    /// Phase-space (w, v) orbits for a list of damping values.
    Phase {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0,0.4", allow_hyphen_values = true)]
        gammas: String,
    },
    /// Fitted inertia decay rate against the damping coefficient.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0.1,0.2,0.4,0.8", allow_hyphen_values = true)]
        gammas: String,
        /// Whole damped periods per run and fit window.
        #[arg(long, default_value_t = 5)]
        periods: u32,
    },
    /// Trajectories on a 2D quadratic from several initializations.
    Traj2d {
        #[command(flatten)]
        common: CommonArgs,
        /// Semicolon-separated initial positions, e.g. "1,0;0,1;1,1".
        #[arg(long, default_value = "1,0;0,1;1,1", allow_hyphen_values = true)]
        inits: String,
    },
    /// Discrete momentum map and its inertia.
    Discrete {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.01)]
        eta: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Also run with eta/2 over the same horizon and report the drift ratio.
        #[arg(long)]
        eta_halving: bool,
    },
    /// Ensemble estimate of the expected inertia balance under noise.
    Stochastic {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1000)]
        members: usize,
    },
    /// Render an experiment CSV as a static SVG line plot.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Columns to plot as X:Y (`w` and `v` mean the first coordinate).
        #[arg(long)]
        xy: Option<String>,
        /// Column whose values split the rows into curves (default: gamma, if present).
        #[arg(long)]
        group: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Damping coefficient.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Noise amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Noise kind: none, white or ou:<tau>.
    #[arg(long, value_parser = parse_noise)]
    pub noise: Option<NoiseKind>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Step size.
    #[arg(long, default_value_t = 0.01)]
    pub h: f64,
    /// Horizon.
    #[arg(long = "T", default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// iso1d, iso2d, iso:<n> or diag:<d1,d2,...>.
    #[arg(long)]
    pub landscape: Option<String>,
    /// Initial position, comma separated (default: all ones).
    #[arg(long, allow_hyphen_values = true)]
    pub w0: Option<String>,
    /// Initial velocity, comma separated (default: zeros).
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output stride in steps.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
}

fn parse_noise(s: &str) -> Result<NoiseKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Outcome of one experiment before the manifest is written.
#[derive(Debug, Default)]
pub(crate) struct Report {
    pub outputs: Vec<String>,
    pub parameters: Value,
    pub notes: Vec<String>,
    /// Post-condition checks that failed; the run exits with code 3.
    pub violations: Vec<String>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => EXIT_INVALID,
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_IO,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let command_line: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(cli.command, command_line) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(command: Command, command_line: Vec<String>) -> crate::Result<i32> {
    let started = Instant::now();
    let (name, common, report) = match command {
        Command::Render {
            input,
            out,
            xy,
            group,
        } => {
            commands::render(&input, &out, xy.as_deref(), group.as_deref())?;
            return Ok(EXIT_OK);
        }
        Command::Conserve { common, gamma0_only } => {
            let r = commands::conserve(&common, gamma0_only)?;
            ("conserve", common, r)
        }
        Command::Phase { common, gammas } => {
            let r = commands::phase(&common, &gammas)?;
            ("phase", common, r)
        }
        Command::Sweep {
            common,
            gammas,
            periods,
        } => {
            let r = commands::sweep(&common, &gammas, periods)?;
            ("sweep", common, r)
        }
        Command::Traj2d { common, inits } => {
            let r = commands::traj2d(&common, &inits)?;
            ("traj2d", common, r)
        }
        Command::Discrete {
            common,
            eta,
            steps,
            eta_halving,
        } => {
            let r = commands::discrete(&common, eta, steps, eta_halving)?;
            ("discrete", common, r)
        }
        Command::Stochastic { common, members } => {
            let r = commands::stochastic(&common, members)?;
            ("stochastic", common, r)
        }
    };

    let mut manifest = RunManifest::new(name, report.parameters, common.seed, command_line);
    manifest.outputs = report.outputs;
    manifest.notes = report.notes;
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write_atomic(&common.out_dir)?;

    if report.violations.is_empty() {
        Ok(EXIT_OK)
    } else {
        for v in &report.violations {
            eprintln!("check failed: {v}");
        }
        Ok(EXIT_NUMERICAL)
    }
}
