//! `neurosim`: dataset synthesis, training, evaluation, mixed-signal
//! inference and hardware reports from one binary.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration or data, 4 IO.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use neurosim::mixed_signal::{MAX_BITS, MIN_BITS};

#[derive(Parser)]
#[command(name = "neurosim", version, about = "Spiking-network simulator and hardware model")]
struct Cli {
    /// JSON file of option values for the subcommand; flags given on the
    /// command line override it. Seeds fall back to NEUROSIM_SEED.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic blob dataset (PGM/PPM images + manifest.csv).
    Synth(SynthArgs),
    /// Train a network on a dataset; writes model.nsnn, history.csv and run.json.
    Train(TrainArgs),
    /// Accuracy of a checkpoint on a dataset (inference mode).
    Eval(EvalArgs),
    /// Run one input through the ADC -> network -> DAC chain and log SPI frames.
    Msrun(MsrunArgs),
    /// Resource, latency and efficiency report for a spec and cost table.
    Report(ReportArgs),
    /// Compare chip designs against the first one.
    Compare(CompareArgs),
    /// Fit a cost table to published resource totals.
    Calibrate(CalibrateArgs),
}

fn parse_classes(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n @ (2 | 10)) => Ok(n),
        _ => Err(format!("{s} is not a supported class count (2 or 10)")),
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(f) if (0.0..1.0).contains(&f) => Ok(f),
        _ => Err(format!("{s} is not in [0, 1)")),
    }
}

fn parse_bits(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(b) if (MIN_BITS..=MAX_BITS).contains(&b) => Ok(b),
        _ => Err(format!("{s} is not a bit width in {MIN_BITS}..={MAX_BITS}")),
    }
}

#[derive(Args, Serialize)]
pub struct SynthArgs {
    /// Number of classes (2 or 10).
    #[arg(long, value_parser = parse_classes)]
    classes: Option<usize>,
    /// Samples per class.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Image height [default: 16].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    height: Option<u64>,
    /// Image width [default: 16].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    width: Option<u64>,
    /// Image channels, 1 or 3 [default: 1 for 2 classes, 3 for 10].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=3))]
    channels: Option<u64>,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    /// Spec JSON file or builtin name (bcu-mini, fcu-mini, bcu-ref, fcu-ref).
    #[arg(long)]
    spec: Option<String>,
    /// Dataset directory or manifest file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Training epochs [default: 20].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Mini-batch size [default: 16].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    batch_size: Option<u64>,
    /// Adam learning rate [default: 0.005].
    #[arg(long)]
    lr: Option<f64>,
    /// Evaluate accuracies every this many epochs [default: 1].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    eval_every: Option<u64>,
    /// Fraction of samples held out for testing [default: 0.2].
    #[arg(long, value_parser = parse_fraction)]
    test_fraction: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    All,
    Train,
    Test,
}

#[derive(Args, Serialize)]
pub struct EvalArgs {
    /// Spec to check the checkpoint against (defaults to the checkpoint's own).
    #[arg(long)]
    spec: Option<String>,
    /// Checkpoint written by `train`.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Dataset directory or manifest file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Which part of the seeded train/test split to score [default: all].
    #[arg(long, value_enum)]
    split: Option<Split>,
    /// Seed of the split (use the training seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Test fraction of the split [default: 0.2].
    #[arg(long, value_parser = parse_fraction)]
    test_fraction: Option<f64>,
    /// Output directory for eval.json and run.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFormat {
    /// 32-bit big-endian words.
    Bin,
    /// One lowercase 8-digit hex word per line.
    Hex,
}

#[derive(Args, Serialize)]
pub struct MsrunArgs {
    #[arg(long)]
    spec: Option<String>,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Input image (PGM/PPM, normalized like training data) or tensor JSON of voltages.
    #[arg(long)]
    input: Option<PathBuf>,
    /// ADC resolution [default: 12].
    #[arg(long, value_parser = parse_bits)]
    adc_bits: Option<u32>,
    /// DAC resolution [default: 12].
    #[arg(long, value_parser = parse_bits)]
    dac_bits: Option<u32>,
    /// ADC input range low end in volts [default: -1].
    #[arg(long, allow_hyphen_values = true)]
    adc_vmin: Option<f64>,
    /// ADC input range high end in volts [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    adc_vmax: Option<f64>,
    /// DAC output range low end in volts [default: -1].
    #[arg(long, allow_hyphen_values = true)]
    dac_vmin: Option<f64>,
    /// DAC output range high end in volts [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    dac_vmax: Option<f64>,
    /// Gaussian ADC input noise sigma in volts [default: 0].
    #[arg(long)]
    adc_noise: Option<f64>,
    /// Seed of the ADC noise stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Frame log path [default: <out>/frames.bin or frames.hex].
    #[arg(long)]
    frames_out: Option<PathBuf>,
    /// Frame log encoding [default: bin].
    #[arg(long, value_enum)]
    frames_format: Option<FrameFormat>,
    /// Output directory for msrun.json, the frame log and run.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Serialize)]
pub struct ReportArgs {
    /// Spec JSON file or builtin name.
    #[arg(long)]
    spec: Option<String>,
    /// Cost table JSON.
    #[arg(long)]
    cost: Option<PathBuf>,
    /// Platform budget JSON [default: XCZU7EV].
    #[arg(long)]
    budget: Option<PathBuf>,
    /// Measured accuracy fraction to include.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Render the shipped reference designs (bcu, fcu or all) instead of --spec/--cost.
    #[arg(long, num_args = 0..=1, default_missing_value = "all", value_name = "DESIGN")]
    paper_fixtures: Option<String>,
    /// text or json [default: text].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output directory for the report and run.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct CompareArgs {
    /// Design JSON files; the first is the baseline.
    #[arg(long, num_args = 1..)]
    designs: Vec<PathBuf>,
    /// Compare the shipped digital CMOS and mixed-signal designs.
    #[arg(long)]
    paper_fixtures: bool,
    /// text, json or csv [default: text].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output directory for the table and run.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct CalibrateArgs {
    /// Spec JSON file or builtin name; repeat to fit several designs.
    #[arg(long)]
    spec: Vec<String>,
    /// Targets JSON, one per --spec in the same order.
    #[arg(long)]
    targets: Vec<PathBuf>,
    /// Cost table to start from [default: built-in defaults].
    #[arg(long)]
    base: Option<PathBuf>,
    /// Fit one shipped reference design (bcu or fcu) from its shipped base table and targets.
    #[arg(long, value_name = "DESIGN")]
    paper_fixtures: Option<String>,
    /// Output directory for cost.json, calibration.json and run.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::Synth(a) => commands::synth(a, config),
        Command::Train(a) => commands::train(a, config),
        Command::Eval(a) => commands::eval(a, config),
        Command::Msrun(a) => commands::msrun(a, config),
        Command::Report(a) => commands::report(a, config),
        Command::Compare(a) => commands::compare(a, config),
        Command::Calibrate(a) => commands::calibrate(a, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("neurosim: {e}");
            ExitCode::from(e.code)
        }
    }
}
