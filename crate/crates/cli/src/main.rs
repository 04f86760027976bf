mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlferns::ferns::{DEFAULT_DEPTH, DEFAULT_FERNS, DEFAULT_PER_CLASS_CAP};
use mlferns::synth::DEFAULT_TRIM_THRESHOLD;

/// Multi-label random ferns for instrument recognition.
#[derive(Debug, Parser)]
#[command(name = "mlferns", version)]
struct Cli {
    /// Worker threads; 1 gives timing-comparable single-threaded runs.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize labeled training mixes from an instrument library.
    Synth(SynthArgs),
    /// Extract per-frame features from a WAV file.
    Features(FeaturesArgs),
    /// Train a model from a labeled feature CSV.
    Train(TrainArgs),
    /// Label every frame of a recording.
    Predict(PredictArgs),
    /// Score frame predictions against annotations.
    Evaluate(EvaluateArgs),
    /// Measure model size and real-time factor.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Multilabel,
    Battery,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Kv,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Manifest with one `<instrument> <wav path>` pair per line.
    #[arg(long)]
    library: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIM_THRESHOLD)]
    trim_threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[arg(long)]
    wav: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    framing: Framing,
}

#[derive(Debug, Args)]
struct Framing {
    /// Frame length; the feature set is defined on 40 ms frames only.
    #[arg(long, default_value_t = 40.0)]
    frame_ms: f64,
    #[arg(long, default_value_t = 10.0)]
    hop_ms: f64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Multilabel)]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_FERNS)]
    ferns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Positives (and negatives) per battery member.
    #[arg(long, default_value_t = DEFAULT_PER_CLASS_CAP)]
    per_class_cap: usize,
    /// Store leaf values as 32-bit floats.
    #[arg(long)]
    f32: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Recording to featurize and label.
    #[arg(long, conflicts_with = "features", required_unless_present = "features")]
    wav: Option<PathBuf>,
    /// Precomputed feature CSV instead of audio; rms is written as 0.
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    framing: Framing,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Frame dump from `predict`.
    #[arg(long)]
    pred: PathBuf,
    /// Segment annotations (`start_time,end_time,labels`) or a frame dump.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of model files.
    #[arg(long)]
    models: PathBuf,
    /// Directory of WAV recordings.
    #[arg(long)]
    wav: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
