//! Command-line front end: configuration, subcommands, CSV and SVG output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;
use output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "metareactor", version, about = "Design and scale-up of induction-heated metamaterial reactors")]
pub struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for `sweep`; overrides `[sweep] workers`.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print the resolved configuration and grid, then stop.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Susceptor and coil resistance and coupling against frequency.
    Impedance {
        #[arg(long, default_value_t = 1e4)]
        f_min_hz: f64,
        #[arg(long, default_value_t = 1e8)]
        f_max_hz: f64,
        #[arg(long, default_value_t = 81)]
        n_points: usize,
    },
    /// Coupling efficiency over (beta, f) with conductivity set by the skin-depth rule.
    Contour {
        #[arg(long, default_value_t = 1.0)]
        beta_min: f64,
        #[arg(long, default_value_t = 64.0)]
        beta_max: f64,
        #[arg(long, default_value_t = 25)]
        n_beta: usize,
        #[arg(long, default_value_t = 1e4)]
        f_min_hz: f64,
        #[arg(long, default_value_t = 1e8)]
        f_max_hz: f64,
        #[arg(long, default_value_t = 33)]
        n_f: usize,
    },
    /// Steady reactor solve at the configured GHSV.
    Simulate {
        /// Fixed RMS coil current instead of holding the outlet at the target temperature.
        #[arg(long)]
        current_a: Option<f64>,
    },
    /// GHSV and efficiency over beta for each reactor type (resumable).
    Sweep,
    /// Coil self-resonance estimate and operability verdicts.
    Srf {
        /// Drive frequencies to judge; defaults to `[susceptor] frequency_hz`.
        #[arg(long = "frequency-hz")]
        frequency_hz: Vec<f64>,
    },
    /// Fit a uniform effective conductivity to a resistance curve.
    Fit {
        /// CSV with columns f_Hz and R_ohm.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        max_residual: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Impedance { .. } => "impedance",
            Command::Contour { .. } => "contour",
            Command::Simulate { .. } => "simulate",
            Command::Sweep => "sweep",
            Command::Srf { .. } => "srf",
            Command::Fit { .. } => "fit",
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(w) = cli.workers {
        config.sweep.workers = w;
    }
    if cli.dry_run {
        print!("{}", commands::dry_run_report(&config)?);
        return Ok(());
    }
    let mut out = OutputDir::create(&cli.out, &config.hash())?;
    match &cli.command {
        Command::Impedance { f_min_hz, f_max_hz, n_points } => {
            commands::impedance(&config, &mut out, *f_min_hz, *f_max_hz, *n_points)?
        }
        Command::Contour { beta_min, beta_max, n_beta, f_min_hz, f_max_hz, n_f } => {
            commands::contour(&config, &mut out, (*beta_min, *beta_max, *n_beta), (*f_min_hz, *f_max_hz, *n_f))?
        }
        Command::Simulate { current_a } => commands::simulate(&config, &mut out, *current_a)?,
        Command::Sweep => {
            let workers = match config.sweep.workers {
                0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
                w => w,
            };
            commands::sweep(&config, &mut out, workers)?
        }
        Command::Srf { frequency_hz } => commands::srf(&config, &mut out, frequency_hz)?,
        Command::Fit { data, max_residual } => commands::fit(&config, &mut out, data, *max_residual)?,
    }
    out.finish(cli.command.name(), &config.to_toml())
}
