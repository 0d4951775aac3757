//! `gsl`: simulate mean-variation-error curves, demonstrate gauge freedom and
//! validate gate-set documents.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or parse error.

mod commands;
mod output;
mod ranges;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "gsl", version, about = "Gate-set simulation and mean variation error estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Repetitions per circuit; exact probabilities unless `--shots` is given.
#[derive(Args, Debug, Clone, Default)]
#[group(multiple = false)]
pub struct ShotArgs {
    /// Simulate this many shots per circuit.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Use exact outcome probabilities (no shot noise).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the six depolarizing/unitary MVE series as CSV files.
    Figure {
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Average gate infidelity of both error models.
        #[arg(long, default_value_t = 1e-4)]
        r: f64,
        /// Circuits per length.
        #[arg(long, default_value_t = 200)]
        circuits: usize,
        /// Lengths for the main series (`a..b:step` or a comma list).
        #[arg(long, default_value = "100..1000:100")]
        ms: String,
        /// Lengths for the short unitary series.
        #[arg(long, default_value = "1..20")]
        small_ms: String,
        #[command(flatten)]
        shots: ShotArgs,
    },
    /// Show how a gauge family changes fidelity, diamond distance and
    /// canonical validity while leaving every probability unchanged.
    GaugeDemo {
        /// State polarization.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        eps1: f64,
        /// Readout signal-to-noise.
        #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
        eps2: f64,
        /// Amplitude-damping strength.
        #[arg(long, default_value_t = 0.36)]
        gamma: f64,
        /// Gauge parameters (comma list).
        #[arg(long, default_value = "1,0.5,0", allow_hyphen_values = true)]
        q: String,
        /// Seed for the random circuits used in the probability check.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for the JSON report and gate-set documents.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate an MVE curve from a protocol configuration document.
    Estimate {
        /// Protocol configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Ideal gate-set document; defaults to |0⟩, the Clifford group and a Z readout.
        #[arg(long)]
        ideal: Option<PathBuf>,
        /// Noisy gate-set document; defaults to the ideal set with the config's error model.
        #[arg(long)]
        noisy: Option<PathBuf>,
        /// Output CSV; a `.provenance.json` sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ms: Option<String>,
        #[arg(long)]
        circuits: Option<usize>,
        #[command(flatten)]
        shots: ShotArgs,
        /// Accept gate-sets that violate the canonical constraints.
        #[arg(long)]
        skip_validation: bool,
    },
    /// Check a gate-set document against the canonical constraints.
    Validate {
        /// Gate-set document (JSON).
        path: PathBuf,
    },
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Usage(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(text) = std::env::var("GSL_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().map_err(|_| anyhow::anyhow!("GSL_THREADS must be a positive integer, got '{text}'"))?;
    anyhow::ensure!(n > 0, "GSL_THREADS must be a positive integer, got '{text}'");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Figure { out, seed, r, circuits, ms, small_ms, shots } => {
            commands::figure(&commands::FigureArgs {
                out,
                seed,
                r,
                circuits,
                ms: ranges::parse_lengths(&ms)?,
                small_ms: ranges::parse_lengths(&small_ms)?,
                shots: commands::shots_of(&shots),
            })
        }
        Command::GaugeDemo { eps1, eps2, gamma, q, seed, out } => {
            commands::gauge_demo(eps1, eps2, gamma, &ranges::parse_reals(&q)?, seed, out.as_deref())
        }
        Command::Estimate { config, ideal, noisy, out, seed, ms, circuits, shots, skip_validation } => {
            commands::estimate(&commands::EstimateArgs {
                config,
                ideal,
                noisy,
                out,
                seed,
                ms: ms.as_deref().map(ranges::parse_lengths).transpose()?,
                circuits,
                shots: (shots.exact || shots.shots.is_some()).then(|| commands::shots_of(&shots)),
                skip_validation,
            })
        }
        Command::Validate { path } => commands::validate(&path),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("gsl: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("gsl: {e:#}");
            ExitCode::from(2)
        }
    }
}
