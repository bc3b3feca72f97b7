//! `mollow` — command-line front end for the resonance-fluorescence toolkit.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 domain error (printed as a
//! JSON line on stderr), 3 fit did not converge.

// NaN-rejecting `!(x > 0)` guards, as in the library
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod scenario;

#[derive(Parser)]
#[command(name = "mollow", version, about = "Resonance fluorescence of a driven two-level emitter: spectra, photon correlations, instrument chain, photon streams, and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    /// Formula-text-verbatim population factor and sideband coefficient.
    Literal,
    /// Standard theory (default); agrees with the numeric master equation.
    Standard,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FitKind {
    Saturation,
    Lifetime,
    Spectrum,
    G2,
    Visibility,
    Cascade,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FigureId {
    Fig2,
    Fig3a,
    Fig3d,
    Fig4a,
    Fig4b,
    #[value(name = "figS2")]
    FigS2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NormArg {
    Baseline,
    Raw,
}

#[derive(Subcommand)]
enum Command {
    /// Emission spectrum on a symmetric offset grid (CSV: offset_ghz, intensity)
    Spectrum {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Standard)]
        mode: ModeArg,
        /// Half-span of the offset grid in GHz (default: max(5·Ω/2π, 6.4))
        #[arg(long)]
        span_ghz: Option<f64>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        /// Use the numeric master-equation route instead of the closed form
        #[arg(long)]
        numeric: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Second-order correlation g²(τ) (CSV: tau_ps, g2)
    G2 {
        #[arg(long)]
        scenario: PathBuf,
        /// Apply the detection chain: IRF smearing and background mixing
        #[arg(long)]
        instrumented: bool,
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 800.0)]
        span_ps: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Incoherent first-order coherence (CSV: tau_ps, g1_incoh)
    G1 {
        #[arg(long)]
        scenario: PathBuf,
        /// Apply the IRF smearing of the detection chain
        #[arg(long)]
        instrumented: bool,
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 800.0)]
        span_ps: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sideband-cascade cross-correlation model (CSV: tau_ps, g)
    Cascade {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        instrumented: bool,
        #[arg(long, default_value_t = 600.0)]
        span_ps: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Least-squares fit of a data file (JSON result)
    Fit {
        #[arg(long, value_enum)]
        kind: FitKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scenario supplying fixed parameters (emitter, instrument, ...)
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Also fit the IRF width (g2 kind only)
        #[arg(long)]
        fit_irf: bool,
        /// Iteration budget override (mainly for testing non-convergence)
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Simulate a quantum-jump photon stream into a tag file
    Mc {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        duration_ms: f64,
        #[arg(long, default_value_t = 1.0)]
        efficiency: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output tag file; `.csv` extension selects the text format
        #[arg(long)]
        tags: PathBuf,
    },
    /// Histogram pairwise delays of a tag file into g²(τ) (CSV: tau_ps, g2)
    Correlate {
        #[arg(long)]
        tags: PathBuf,
        /// Second tag file for a cross-correlation
        #[arg(long)]
        tags_b: Option<PathBuf>,
        #[arg(long)]
        bin_ps: u64,
        #[arg(long)]
        max_tau_ps: u64,
        #[arg(long, value_enum, default_value_t = NormArg::Baseline)]
        normalization: NormArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a bundled demo dataset into a directory (CSV + manifest)
    Reproduce {
        #[arg(long, value_enum)]
        figure: FigureId,
        #[arg(long)]
        out: PathBuf,
    },
}

pub struct Failure {
    pub code: u8,
    pub message: String,
    pub machine: Option<serde_json::Value>,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into(), machine: None }
    }

    pub fn from_lib(err: mollow::Error) -> Self {
        let machine = serde_json::json!({
            "error": format!("{err:?}").split(['{', '(']).next().unwrap_or("Error").trim(),
            "detail": err.to_string(),
        });
        Self { code: err.exit_class() as u8, message: err.to_string(), machine: Some(machine) }
    }

    pub fn io(err: std::io::Error) -> Self {
        Self { code: 1, message: err.to_string(), machine: None }
    }
}

fn main() -> ExitCode {
    // usage errors exit 1 (clap's default would be 2, which is reserved for
    // domain errors here); --help and --version stay exit 0
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(machine) = &f.machine {
                eprintln!("{machine}");
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
