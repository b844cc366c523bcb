//! Command-line front end for the `pointtrap` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod units;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

use crate::units::{Duration, ElectricField, Length};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pointtrap", version, about = "Point Paul trap modelling and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct ConfigArgs {
    /// Trap configuration (JSON).
    pub config: PathBuf,
    /// JSON files merged over the config in order; a `characterize` report is accepted.
    #[arg(long = "overrides", value_name = "FILE")]
    pub overrides: Vec<PathBuf>,
    /// Output file (stdout if omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Axial,
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trap height, frequencies and depth as a JSON report.
    Characterize {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Depth-optimal ring radii for a target ion height (JSON).
    Optimize {
        /// Target height, e.g. `1mm` or `1e-3`.
        #[arg(long)]
        height: Length,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Height, q and depth against the inner-electrode drive ratio (CSV).
    SweepEpsilon {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
    /// κ, its gradient and Ψ on an n × n grid (CSV).
    Fieldmap {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        rho_max: Length,
        #[arg(long)]
        z_min: Length,
        #[arg(long)]
        z_max: Length,
        #[arg(long)]
        n: usize,
    },
    /// Time-domain trajectory of one ion (CSV).
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "axial")]
        mode: Mode,
        #[arg(long)]
        duration: Duration,
        /// Step size; defaults to a hundredth of the rf period.
        #[arg(long)]
        dt: Option<Duration>,
        /// Initial axial offset from the node [default: 0.01·z₀].
        #[arg(long, allow_negative_numbers = true)]
        z_offset: Option<Length>,
        /// Initial radial offset (3d mode).
        #[arg(long, default_value = "0")]
        rho_offset: Length,
        /// Initial axial velocity (m/s).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        v_z: f64,
        /// Uniform dc field along the axis (axial mode).
        #[arg(long, allow_negative_numbers = true)]
        e_dc: Option<ElectricField>,
        /// Field map nodes per axis (3d mode).
        #[arg(long, default_value_t = 400)]
        map_n: usize,
    },
    /// Equilibrium positions of an ion crystal (CSV) with a JSON summary on stdout.
    Crystal {
        /// Trap configuration (JSON).
        config: PathBuf,
        #[arg(long = "overrides", value_name = "FILE")]
        overrides: Vec<PathBuf>,
        /// Position CSV.
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = pointtrap::crystal::DEFAULT_RESTARTS)]
        restarts: usize,
        /// Use the interpolated pseudopotential instead of its harmonic expansion.
        #[arg(long)]
        full: bool,
        /// Field map nodes per axis (with --full).
        #[arg(long, default_value_t = 400)]
        map_n: usize,
    },
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
