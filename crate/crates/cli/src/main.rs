//! `pac`: construction, simulation, bound and spectrum campaigns for PAC codes.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pac_core::PacError;

#[derive(Parser, Debug)]
#[command(name = "pac", version, about = "PAC code construction, simulation and bounds")]
struct Cli {
    /// key=value file supplying defaults for any long option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a frozen set and write a code-spec file.
    Construct(ConstructArgs),
    /// Monte-Carlo FER/BER sweep.
    Simulate(SimulateArgs),
    /// Compare decoding steps with and without the simplified encoder.
    Steps(StepsArgs),
    /// Normal-approximation FER curve.
    Bound(BoundArgs),
    /// Distance-spectrum report of a code.
    Spectrum(SpectrumArgs),
    /// Emit a gnuplot script for result CSVs.
    Plot(PlotArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rm,
    Gade,
    Beta,
    Genetic,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Method as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(short = 'N', long = "length")]
    pub big_n: usize,
    #[arg(short = 'K', long = "dimension")]
    pub k: usize,
    #[arg(long)]
    pub systematic: bool,
    #[arg(long)]
    pub simplified: bool,
    /// Forward (parity) polynomial in octal.
    #[arg(long)]
    pub conv_forward: Option<String>,
    /// Feedback polynomial in octal (systematic codes).
    #[arg(long)]
    pub conv_feedback: Option<String>,
    /// Design Eb/N0 in dB for the Gaussian-approximation rule.
    #[arg(long, allow_negative_numbers = true)]
    pub design_snr: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub crossovers: Option<usize>,
    #[arg(long)]
    pub mutation_swaps: Option<usize>,
    /// List size of the distance-spectrum fitness.
    #[arg(long)]
    pub spectrum_list: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Spec file to write (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Progress CSV of the genetic method (default: next to the output).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub snr_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_stop: Option<f64>,
    #[arg(long)]
    pub snr_step: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DecoderArgs {
    /// Threshold increment of the Fano decoder.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Per-frame step budget (default scales with N).
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Traverse Rate-0/Rate-1 nodes explicitly.
    #[arg(long)]
    pub no_shortcuts: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    #[arg(long)]
    pub min_errors: Option<u64>,
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Results CSV (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StepsArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// Matched frames per point.
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(short = 'N', long = "length")]
    pub big_n: usize,
    #[arg(short = 'K', long = "dimension")]
    pub k: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub list_size: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Fer,
    Ber,
    Steps,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// CSV files produced by `simulate`, `bound` or `steps`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlotKind::Fer)]
    pub kind: PlotKind,
    /// Image written by the script.
    #[arg(long, default_value = "plot.png")]
    pub image: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_FAILURE: u8 = 2;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<PacError>()) {
        Some(PacError::Construction(_)) | Some(PacError::Numeric(_)) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
