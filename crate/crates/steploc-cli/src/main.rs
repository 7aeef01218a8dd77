//! Command-line front end for the step-localization toolkit: synthetic
//! dataset generation, score-map fusion, non-overlapping proposal
//! selection, evaluation, training-loss reporting, and solver benchmarks.
//!
//! Exit codes: 0 success, 2 usage errors (from the argument parser),
//! 3 unreadable or malformed input files, 4 infeasible or inconsistent
//! inputs, 5 broken internal invariants.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steploc::bench::{bench, render_bench, BenchConfig, BenchError};
use steploc::format::{self, FormatError, ScoreDataset, FORMAT_VERSION};
use steploc::losses::{LossConfig, LossError};
use steploc::pipeline::{
    compute_losses, ensemble_scores, evaluate_predictions, fuse_dataset,
    predictions_from_assignments, render_loss, render_report, scores_from_features, select_videos,
    PipelineError, SelectConfig,
};
use steploc::solver::SolverError;
use steploc::synth::{generate_synthetic, SynthError, SyntheticSpec};
use steploc::{ProbMap, SelectMethod, DEFAULT_MAX_EXACT_QUERIES};

#[derive(Debug, Parser)]
#[command(
    name = "steploc",
    version,
    about = "Fuse 2D temporal proposal scores and assign one non-overlapping interval per step query"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic score + ground-truth dataset
    Gen(GenArgs),
    /// Fuse sentence/phrase score maps (or raw features) into one map per query
    Fuse(FuseArgs),
    /// Assign one non-overlapping proposal interval to every query
    Select(SelectArgs),
    /// Score a stored prediction file against ground truth
    Eval(EvalArgs),
    /// Report the training-loss terms for a score dataset
    Loss(LossArgs),
    /// Measure how exact-solver time scales in queries and clips
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Output path for the score file
    #[arg(long, value_name = "FILE")]
    out_scores: PathBuf,
    /// Output path for the ground-truth file
    #[arg(long, value_name = "FILE")]
    out_gt: PathBuf,
    #[arg(long, default_value_t = 20)]
    num_videos: usize,
    /// Clips per video (grid side length)
    #[arg(long, default_value_t = 32)]
    num_clips: usize,
    #[arg(long, default_value_t = 2)]
    queries_min: usize,
    #[arg(long, default_value_t = 5)]
    queries_max: usize,
    /// Standard deviation of the additive score noise
    #[arg(long, default_value_t = 0.05)]
    noise_sigma: f64,
    /// Seed for the single RNG stream behind all randomness
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exponent applied to IoU before noise; higher sharpens the peak
    #[arg(long, default_value_t = 2.0)]
    score_sharpness: f64,
    /// Write the score file in the binary encoding (ground truth stays JSON)
    #[arg(long)]
    binary: bool,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true)))]
struct FuseArgs {
    /// Score file whose sentence and phrase grids are fused per query
    #[arg(long, group = "input", value_name = "FILE")]
    scores: Option<PathBuf>,
    /// Feature file; score grids are built by cosine similarity first
    #[arg(long, group = "input", value_name = "FILE")]
    features: Option<PathBuf>,
    /// Two or more aligned score files to fuse and average element-wise
    #[arg(long, group = "input", num_args = 2.., value_name = "FILE")]
    ensemble: Option<Vec<PathBuf>>,
    /// Output path for the fused score file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Write the output in the binary encoding
    #[arg(long)]
    binary: bool,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// Score file to solve (raw maps are fused on the fly)
    #[arg(long, value_name = "FILE")]
    scores: PathBuf,
    /// Output path for the prediction file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "dp")]
    method: MethodArg,
    /// Query count above which exact DP falls back to greedy
    #[arg(long, default_value_t = DEFAULT_MAX_EXACT_QUERIES)]
    max_exact_queries: usize,
    /// How scores become probabilities before taking logs
    #[arg(long, value_enum, default_value = "clamp")]
    prob_map: ProbMapArg,
    /// Probability floor used by the score-to-probability mapping
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    /// Worker threads; 0 means one per core. Output is identical either way
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    predictions: PathBuf,
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Comma-separated IoU thresholds for R@1
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7])]
    thresholds: Vec<f64>,
    /// Also write the report as JSON
    #[arg(long, value_name = "FILE")]
    out_report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LossArgs {
    #[arg(long, value_name = "FILE")]
    scores: PathBuf,
    #[arg(long, value_name = "FILE")]
    gt: PathBuf,
    /// Weight of the mutual-matching term
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Weight of the exclusiveness term
    #[arg(long, default_value_t = 0.05)]
    beta: f64,
    /// IoU at or below this maps to target 0
    #[arg(long, default_value_t = 0.5)]
    iou_scale_min: f64,
    /// IoU at or above this maps to target 1
    #[arg(long, default_value_t = 1.0)]
    iou_scale_max: f64,
    /// Externally computed mutual-matching term folded into the total
    #[arg(long, default_value_t = 0.0)]
    mm: f64,
    #[arg(long, value_enum, default_value = "clamp")]
    prob_map: ProbMapArg,
    /// Probability clamp width; must stay below 0.5 for the cross-entropy
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Also write the loss report as JSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 8)]
    num_queries: usize,
    #[arg(long, default_value_t = 64)]
    num_clips: usize,
    /// Timing repeats per point; the minimum is reported
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest query count the benchmark may solve exactly
    #[arg(long, default_value_t = DEFAULT_MAX_EXACT_QUERIES)]
    cap: usize,
    /// Also write the benchmark report as JSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Dp,
    Greedy,
    BruteForce,
}

impl From<MethodArg> for SelectMethod {
    fn from(value: MethodArg) -> Self {
        match value {
            MethodArg::Dp => SelectMethod::Dp,
            MethodArg::Greedy => SelectMethod::Greedy,
            MethodArg::BruteForce => SelectMethod::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProbMapArg {
    Clamp,
    Sigmoid,
    Minmax,
}

impl From<ProbMapArg> for ProbMap {
    fn from(value: ProbMapArg) -> Self {
        match value {
            ProbMapArg::Clamp => ProbMap::Clamp,
            ProbMapArg::Sigmoid => ProbMap::Sigmoid,
            ProbMapArg::Minmax => ProbMap::MinMax,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("loss configuration: {0}")]
    LossConfig(#[from] LossError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Format(e) => format_exit_code(e),
            CliError::Pipeline(e) => pipeline_exit_code(e),
            CliError::Synth(_) | CliError::Bench(_) | CliError::LossConfig(_) => 4,
        }
    }
}

fn format_exit_code(err: &FormatError) -> u8 {
    match err {
        // Only reachable if the toolkit itself computed a non-finite
        // number; user input never takes this path.
        FormatError::NonFiniteOutput { .. } => 5,
        _ => 3,
    }
}

fn pipeline_exit_code(err: &PipelineError) -> u8 {
    match err {
        PipelineError::Format(e) => format_exit_code(e),
        // Validated score maps cannot produce these; they mean the fusion
        // or mapping stage broke its own contract.
        PipelineError::Solver {
            source: SolverError::NanLogProb { .. } | SolverError::MaskedCellNotNegInf { .. },
            ..
        } => 5,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen(args) => run_gen(args),
        Command::Fuse(args) => run_fuse(args),
        Command::Select(args) => run_select(args),
        Command::Eval(args) => run_eval(args),
        Command::Loss(args) => run_loss(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn run_gen(args: GenArgs) -> Result<(), CliError> {
    let spec = SyntheticSpec {
        num_videos: args.num_videos,
        num_clips: args.num_clips,
        queries_min: args.queries_min,
        queries_max: args.queries_max,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
        score_sharpness: args.score_sharpness,
    };
    let (scores, gt) = generate_synthetic(&spec)?;
    write_scores(&args.out_scores, &scores, args.binary)?;
    format::write_ground_truth(&args.out_gt, &gt)?;
    let queries: usize = scores.videos.iter().map(|v| v.queries.len()).sum();
    println!(
        "wrote {} videos / {} queries: scores -> {}, ground truth -> {}",
        scores.videos.len(),
        queries,
        args.out_scores.display(),
        args.out_gt.display()
    );
    Ok(())
}

fn run_fuse(args: FuseArgs) -> Result<(), CliError> {
    let fused = if let Some(path) = &args.features {
        scores_from_features(&format::read_features(path)?)?
    } else if let Some(path) = &args.scores {
        fuse_dataset(&format::read_scores(path)?)?
    } else {
        let paths = args
            .ensemble
            .as_deref()
            .expect("clap enforces one input mode");
        let datasets = paths
            .iter()
            .map(|p| format::read_scores(p))
            .collect::<Result<Vec<_>, _>>()?;
        ensemble_scores(&datasets)?
    };
    write_scores(&args.out, &fused, args.binary)?;
    println!(
        "wrote fused scores for {} videos -> {}",
        fused.videos.len(),
        args.out.display()
    );
    Ok(())
}

fn run_select(args: SelectArgs) -> Result<(), CliError> {
    let scores = format::read_scores(&args.scores)?;
    if scores.videos.is_empty() {
        return Err(PipelineError::EmptyDataset.into());
    }
    let cfg = SelectConfig {
        method: args.method.into(),
        max_exact_queries: args.max_exact_queries,
        prob_map: args.prob_map.into(),
        epsilon: args.epsilon,
    };
    let (assignments, peak_bytes) = select_videos(&scores, &cfg, args.workers)?;
    let predictions = predictions_from_assignments(&scores, &assignments);
    format::write_predictions(&args.out, &predictions)?;
    let queries: usize = assignments.iter().map(|a| a.entries.len()).sum();
    let fallbacks = assignments.iter().filter(|a| a.fallback_used).count();
    println!(
        "selected {} intervals across {} videos ({} fallbacks, peak DP tables {} bytes) -> {}",
        queries,
        scores.videos.len(),
        fallbacks,
        peak_bytes,
        args.out.display()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    let predictions = format::read_predictions(&args.predictions)?;
    let gt = format::read_ground_truth(&args.gt)?;
    let report = evaluate_predictions(&predictions, &gt, &args.thresholds)?;
    print!("{}", render_report(&report, None));
    if let Some(path) = &args.out_report {
        write_json(
            path,
            serde_json::json!({
                "format_version": FORMAT_VERSION,
                "thresholds": args.thresholds,
                "report": report,
            }),
        )?;
    }
    Ok(())
}

fn run_loss(args: LossArgs) -> Result<(), CliError> {
    let scores = format::read_scores(&args.scores)?;
    let gt = format::read_ground_truth(&args.gt)?;
    let cfg = LossConfig::new(
        args.alpha,
        args.beta,
        args.iou_scale_min,
        args.iou_scale_max,
    )?;
    let report = compute_losses(
        &scores,
        &gt,
        &cfg,
        args.prob_map.into(),
        args.epsilon,
        args.mm,
    )?;
    print!("{}", render_loss(&report));
    if let Some(path) = &args.out {
        write_json(
            path,
            serde_json::to_value(&report).expect("loss report serializes"),
        )?;
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    let cfg = BenchConfig {
        num_queries: args.num_queries,
        num_clips: args.num_clips,
        repeats: args.repeats,
        seed: args.seed,
        cap: args.cap,
    };
    let report = bench(&cfg)?;
    print!("{}", render_bench(&report));
    if let Some(path) = &args.out {
        write_json(
            path,
            serde_json::to_value(&report).expect("bench report serializes"),
        )?;
    }
    Ok(())
}

fn write_scores(path: &Path, dataset: &ScoreDataset, binary: bool) -> Result<(), FormatError> {
    if binary {
        format::write_scores_binary(path, dataset)
    } else {
        format::write_scores_json(path, dataset)
    }
}

fn write_json(path: &Path, value: serde_json::Value) -> Result<(), FormatError> {
    let mut bytes = serde_json::to_vec_pretty(&value).expect("value serializes");
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
