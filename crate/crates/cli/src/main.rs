mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pitchkin::ingest::LengthUnit;

use crate::config::PipelineConfig;
use crate::output::{input_err, CliResult};

#[derive(Parser, Debug)]
#[command(name = "pitchkin", version, about = "Pitching kinematics pipeline")]
struct Cli {
    /// Pipeline configuration TOML.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Length unit of pose input files (ft or m).
    #[arg(long, global = true)]
    unit: Option<LengthUnit>,
    /// Frame rate of pose input files.
    #[arg(long, global = true)]
    fps: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic pitches with ground truth, or a synthetic cohort.
    Synth(SynthArgs),
    /// Lift (optionally) and refine pose files.
    Refine(RefineArgs),
    /// Classify throwing hand from a pose file.
    Handedness(HandednessArgs),
    /// Compute per-frame metrics, events and event samples.
    Metrics(MetricsArgs),
    /// Aggregate per-pitcher features and static flags.
    Features(FeaturesArgs),
    /// Compare measured event samples against a reference.
    Validate(ValidateArgs),
    /// Cross-validated L1-logistic risk screen.
    Screen(ScreenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HandArg {
    Right,
    Left,
    /// Alternate right and left across a corpus.
    Alternate,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "right")]
    handedness: HandArg,
    /// Number of pitches; each gets its own seed and lead-knee target.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Lead knee flexion at foot plant (degrees).
    #[arg(long)]
    knee_fp: Option<f64>,
    /// Forward trunk tilt at ball release (degrees).
    #[arg(long)]
    trunk_tilt_br: Option<f64>,
    #[arg(long)]
    frames: Option<usize>,
    /// Gaussian noise per coordinate (ft).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    outlier_rate: Option<f64>,
    #[arg(long)]
    bone_jitter: Option<f64>,
    /// File name prefix.
    #[arg(long, default_value = "pitch")]
    prefix: String,
    /// Write a pitcher cohort (samples.csv, meta.csv) instead of pitches.
    #[arg(long)]
    cohort: bool,
    #[arg(long)]
    pitchers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    /// Lift pelvis-rooted input: zero, constant_velocity or oracle:<path>.
    #[arg(long)]
    predictor: Option<String>,
}

#[derive(Args, Debug)]
pub struct RefineArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    lift: LiftArgs,
    /// Bone-length projection passes.
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long)]
    ik_max_iter: Option<usize>,
    #[arg(long)]
    no_smooth: bool,
    #[arg(long)]
    no_ik: bool,
    /// Replace isolated outlier joints before smoothing.
    #[arg(long)]
    despike: bool,
    /// Skeleton limits and weights TOML.
    #[arg(long)]
    skeleton: Option<PathBuf>,
    /// Exit with status 3 when any frame's IK stops at the iteration cap.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
pub struct HandednessArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    #[command(flatten)]
    lift: LiftArgs,
    /// Throwing hand; classified from the pose when absent.
    #[arg(long)]
    handedness: Option<pitchkin::handedness::Handedness>,
    /// Event frames JSON (an events file or a synth truth file) used instead
    /// of detection; `{id}` is replaced by each input's pitch id.
    #[arg(long)]
    events: Option<String>,
    /// Pitcher id written into the samples file.
    #[arg(long)]
    pitcher: Option<String>,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Event-sample CSVs with a pitcher_id column.
    #[arg(long, required = true, num_args = 1..)]
    samples: Vec<PathBuf>,
    #[arg(long)]
    meta: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Reference CSVs or synth truth JSON files.
    #[arg(long, required = true, num_args = 1..)]
    reference: Vec<PathBuf>,
    /// Measured event-sample CSVs.
    #[arg(long, required = true, num_args = 1..)]
    predicted: Vec<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    /// Pool all three events instead of each metric's designated event.
    #[arg(long)]
    all_events: bool,
    /// Metrics that must validate for exit status 0.
    #[arg(long, default_value_t = 16)]
    min_validated: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Tj,
    Arm,
}

#[derive(Args, Debug)]
pub struct ScreenArgs {
    #[arg(long, required = true, num_args = 1..)]
    samples: Vec<PathBuf>,
    #[arg(long)]
    meta: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "tj")]
    target: TargetArg,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    no_smote: bool,
}

/// Settings shared by every command after merging file and flags.
pub struct Context {
    pub cfg: PipelineConfig,
    pub seed: u64,
    pub unit: LengthUnit,
    /// Frame rate from the flag or config file, if given.
    pub fps: Option<f64>,
}

impl Context {
    pub fn input_fps(&self) -> f64 {
        self.fps.unwrap_or(1000.0)
    }
}

fn context(cli: &Cli) -> CliResult<Context> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(input_err("config"))?,
        None => PipelineConfig::default(),
    };
    let unit = match (cli.unit, &cfg.unit) {
        (Some(u), _) => u,
        (None, Some(s)) => s.parse().map_err(|e: String| input_err("config")(anyhow::anyhow!(e)))?,
        (None, None) => LengthUnit::Feet,
    };
    let fps = cli.fps.or(cfg.fps);
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    if let Some(jobs) = cli.jobs.or(cfg.jobs) {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().map_err(input_err("cli"))?;
    }
    Ok(Context { cfg, seed, unit, fps })
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = context(&cli)?;
    match cli.command {
        Command::Synth(a) => commands::synth(&ctx, &a),
        Command::Refine(a) => commands::refine(&ctx, &a),
        Command::Handedness(a) => commands::handedness(&ctx, &a),
        Command::Metrics(a) => commands::metrics(&ctx, &a),
        Command::Features(a) => commands::features(&ctx, &a),
        Command::Validate(a) => commands::validate(&ctx, &a),
        Command::Screen(a) => commands::screen(&ctx, &a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error{e}");
        process::exit(e.code as i32);
    }
}
