//! `freqclue` — batch driver for the frequency-domain forgery feature
//! pipeline: corpus synthesis, perturbation, feature extraction, head
//! training, evaluation and debugging dumps.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use freqclue_core::error::Error;

#[derive(Parser)]
#[command(
    name = "freqclue",
    version,
    about = "Frequency-domain video forgery features: synth, perturb, extract, train, eval, inspect"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus of smooth "real" videos and upsampled
    /// "fake" videos.
    Synth(SynthArgs),
    /// Apply a perturbation to every frame of a manifest, writing a new
    /// corpus.
    Perturb(PerturbArgs),
    /// Extract one fused feature vector per video.
    Extract(ExtractArgs),
    /// Train the linear head on a feature file.
    Train(TrainArgs),
    /// Score a feature file with a trained head and report accuracy + AUC.
    Eval(EvalArgs),
    /// Debugging dumps: band maps, attention CSVs, band-energy stats.
    Inspect(InspectArgs),
}

/// Flags shared by every command that runs the feature pipeline.
#[derive(Args, Clone)]
struct PipelineArgs {
    /// Frames sampled per video.
    #[arg(long, default_value_t = 16)]
    frames: usize,
    /// Block grid as RxC.
    #[arg(long, default_value = "4x4")]
    blocks: String,
    /// Band-weighting base.
    #[arg(long, default_value_t = freqclue_core::weighting::DEFAULT_BASE)]
    beta: f64,
    /// Block reduction: max, min, avg or absmax.
    #[arg(long, default_value = "max")]
    reduction: String,
    /// Backbone: identity, randconv:<channels>@<strides> or file:<path>.
    #[arg(long, default_value = "identity")]
    backbone: String,
    /// Seed for seeded backbones and downstream consumers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Normalization epsilon for the attention stages.
    #[arg(long, default_value_t = freqclue_core::fta::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Square resize applied during preprocessing (defaults to native size).
    #[arg(long)]
    resize: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for frames + manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "per-class", default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 16)]
    frames: usize,
    /// Square frame side in pixels.
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Fake-class upsampling factor (2 or 4).
    #[arg(long, default_value_t = 2)]
    factor: usize,
    /// Upsampling mode: nearest or bilinear.
    #[arg(long, default_value = "nearest")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leading fraction of each class tagged as the train split.
    #[arg(long = "train-frac", default_value_t = 0.7)]
    train_frac: f64,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Perturbation spec: blur:<sigma>[,<radius>], noise:<sigma>,
    /// jpeg:<quality> or contrast:<gain>.
    #[arg(long)]
    perturb: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory (features.jsonl, features.fcf, run.json).
    #[arg(long)]
    out: PathBuf,
    /// Restrict to samples with this split tag.
    #[arg(long)]
    split: Option<String>,
    /// Per-video worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Training feature file (JSON-lines).
    #[arg(long)]
    features: PathBuf,
    /// Validation feature file for the plateau schedule (defaults to the
    /// training set).
    #[arg(long)]
    val: Option<PathBuf>,
    /// Output head file (JSON).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long = "batch-size", default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Accept validation features with a mismatched config fingerprint.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Feature file to score (JSON-lines).
    #[arg(long)]
    features: PathBuf,
    /// Trained head file.
    #[arg(long)]
    head: PathBuf,
    /// Optional report file; the report always goes to stdout as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Compare despite a config fingerprint mismatch.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[command(subcommand)]
    what: InspectCommand,
}

#[derive(Subcommand)]
enum InspectCommand {
    /// Print the band-exponent map as a text grid.
    Bands {
        #[arg(long, default_value_t = 8)]
        height: usize,
        #[arg(long, default_value_t = 8)]
        width: usize,
        #[arg(long, default_value_t = freqclue_core::weighting::DEFAULT_BASE)]
        beta: f64,
    },
    /// Dump one video's attention map as CSV (N rows x K columns).
    Attention {
        #[arg(long)]
        manifest: PathBuf,
        /// Video id within the manifest.
        #[arg(long)]
        id: String,
        /// Optional CSV output path (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Per-class mean spectral energy in the low/mid/high bands.
    BandEnergy {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        split: Option<String>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

/// Exit codes: 2 config/usage, 3 io, 4 malformed inputs, 5 shape/numeric,
/// 6 degenerate data or metric, 7 fingerprint mismatch.
fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) => 2,
        Error::Io { .. } | Error::Image { .. } => 3,
        Error::Format { .. } | Error::EmptyVideo { .. } => 4,
        Error::Shape { .. }
        | Error::Partition { .. }
        | Error::DegenerateBands { .. }
        | Error::NonFinite { .. }
        | Error::Geometry { .. } => 5,
        Error::DegenerateData(_) | Error::UndefinedMetric(_) | Error::UntrainedHead => 6,
        Error::FingerprintMismatch { .. } => 7,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FREQCLUE_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => commands::synth(args),
        Command::Perturb(args) => commands::perturb(args),
        Command::Extract(args) => commands::extract(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Inspect(args) => commands::inspect(args),
    };
    if let Err(error) = result {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}
