//! End-to-end orchestration: fuse → log-probabilities → select → evaluate.
//!
//! Videos are processed concurrently up to a configurable worker count.
//! Every step is a pure function of its inputs, selection runs per video,
//! and results are reduced in input order, so outputs are identical for
//! any worker count.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::CoreError;
use crate::format::{
    self, FeatureDataset, FormatError, GroundTruthDataset, PredictionDataset, PredictionEntry,
    QueryScores, ScoreDataset, VideoGroundTruth, VideoPrediction, VideoScores, FORMAT_VERSION,
};
use crate::fusion::{
    build_query_score_map, fuse_score_maps, mean_score_maps, softmax_importance, FusionError,
};
use crate::interval::ClipInterval;
use crate::losses::{bce_loss, exclusiveness_loss, iou_targets, total_loss, LossConfig, LossError};
use crate::metrics::{
    average_recall, overlap_fraction, recall_at_iou, EvalReport, MetricsError, RecallEntry,
};
use crate::prob::{to_bounded_probabilities, to_probabilities, ProbError, ProbMap};
use crate::solver::{
    brute_force_select, dp_select, dp_table_bytes, greedy_select, score_to_logprob, SolverError,
    DEFAULT_MAX_EXACT_QUERIES,
};
use crate::types::{Assignment, AssignmentEntry, ScoreMap, ScoreStack, SelectMethod};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Format(#[from] FormatError),

    #[error(transparent)]
    Prob(#[from] ProbError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error("video {video_id}: {source}")]
    Solver {
        video_id: String,
        source: SolverError,
    },

    #[error("video {video_id}, query {query_id}: {source}")]
    Fusion {
        video_id: String,
        query_id: String,
        source: FusionError,
    },

    #[error(
        "video {video_id}, query {query_id}: phrase grids present but importance_logits missing"
    )]
    MissingLogits { video_id: String, query_id: String },

    #[error("video {video_id}: {source}")]
    Stack { video_id: String, source: CoreError },

    #[error("video {video_id}, query {query_id}: {source}")]
    Loss {
        video_id: String,
        query_id: String,
        source: LossError,
    },

    #[error("score data has no videos")]
    EmptyDataset,

    #[error("at least one IoU threshold is required")]
    EmptyThresholds,

    #[error("video {video_id} has no ground truth")]
    MissingGroundTruthVideo { video_id: String },

    #[error("ground truth lists video {video_id}, which the scores do not contain")]
    ExtraGroundTruthVideo { video_id: String },

    #[error("video {video_id}: scores have {scores} clips but ground truth has {ground_truth}")]
    ClipCountMismatch {
        video_id: String,
        scores: usize,
        ground_truth: usize,
    },

    #[error("video {video_id}: query {query_id} has no ground truth")]
    MissingGroundTruthQuery { video_id: String, query_id: String },

    #[error("video {video_id}: scores have {scores} queries but ground truth has {ground_truth}")]
    QueryCountMismatch {
        video_id: String,
        scores: usize,
        ground_truth: usize,
    },

    #[error("predictions are missing video {video_id}")]
    MissingPredictionVideo { video_id: String },

    #[error("predictions list video {video_id}, which the ground truth does not contain")]
    ExtraPredictionVideo { video_id: String },

    #[error("video {video_id}: query {query_id} has no prediction")]
    MissingPrediction { video_id: String, query_id: String },

    #[error("video {video_id}: {predictions} predictions for {ground_truth} ground-truth queries")]
    PredictionCountMismatch {
        video_id: String,
        predictions: usize,
        ground_truth: usize,
    },

    #[error(
        "video {video_id}, query {query_id}: predicted interval does not fit {num_clips} clips"
    )]
    PredictionOutOfRange {
        video_id: String,
        query_id: String,
        num_clips: usize,
    },

    #[error("ensemble input {dataset}: {message}")]
    EnsembleMismatch { dataset: usize, message: String },

    #[error("matching loss must be finite, got {0}")]
    NonFiniteMatching(f64),
}

// ---------------------------------------------------------------------------
// Configuration

/// How score maps become one assignment per video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub method: SelectMethod,
    /// Above this query count the exact solver falls back to greedy.
    pub max_exact_queries: usize,
    pub prob_map: ProbMap,
    pub epsilon: f64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            method: SelectMethod::Dp,
            max_exact_queries: DEFAULT_MAX_EXACT_QUERIES,
            prob_map: ProbMap::Clamp,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub select: SelectConfig,
    pub thresholds: Vec<f64>,
    /// Worker threads for per-video work; 0 means one per core.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            select: SelectConfig::default(),
            thresholds: vec![0.3, 0.5, 0.7],
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuntimeCounters {
    /// Wall time of the full fuse→select→evaluate span.
    pub wall_ms: u64,
    /// Wall time of the selection phase alone.
    pub select_ms: u64,
    /// Largest DP table footprint any single video needed.
    pub peak_dp_table_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub report: EvalReport,
    pub predictions: PredictionDataset,
    pub counters: RuntimeCounters,
}

/// On-disk evaluation report: the numbers plus the configuration that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub config: PipelineConfig,
    pub report: EvalReport,
    pub counters: RuntimeCounters,
}

// ---------------------------------------------------------------------------
// Fusion over datasets

/// Collapses one video's raw per-query grids into one fused grid per query.
///
/// Queries without phrase grids pass their sentence grid through unchanged;
/// queries with phrase grids need logits, which are softmaxed into the
/// fusion weights.
pub fn fuse_video(video: &VideoScores) -> Result<ScoreStack, PipelineError> {
    let mut maps = Vec::with_capacity(video.queries.len());
    for query in &video.queries {
        maps.push(fuse_query(&video.video_id, query)?);
    }
    ScoreStack::new(video.video_id.clone(), maps).map_err(|source| PipelineError::Stack {
        video_id: video.video_id.clone(),
        source,
    })
}

fn fuse_query(video_id: &str, query: &QueryScores) -> Result<ScoreMap, PipelineError> {
    if query.phrase_scores.is_empty() {
        return Ok(query.sentence_scores.clone());
    }
    let logits =
        query
            .importance_logits
            .as_deref()
            .ok_or_else(|| PipelineError::MissingLogits {
                video_id: video_id.to_string(),
                query_id: query.query_id.clone(),
            })?;
    let fuse = || -> Result<ScoreMap, FusionError> {
        let weights = softmax_importance(logits)?;
        let phrase_refs: Vec<&ScoreMap> = query.phrase_scores.iter().collect();
        fuse_score_maps(&query.sentence_scores, &phrase_refs, &weights)
    };
    fuse().map_err(|source| PipelineError::Fusion {
        video_id: video_id.to_string(),
        query_id: query.query_id.clone(),
        source,
    })
}

/// Per-dataset lookup: video id -> (clip count, query id -> fused map).
type FusedIndex<'a> = HashMap<&'a str, (usize, HashMap<&'a str, ScoreMap>)>;

/// Element-wise mean of several aligned score datasets, fusing each one
/// first. Videos and queries are aligned by id; the first dataset fixes the
/// output order. A single dataset is simply fused.
pub fn ensemble_scores(datasets: &[ScoreDataset]) -> Result<ScoreDataset, PipelineError> {
    let first = datasets.first().ok_or(PipelineError::EnsembleMismatch {
        dataset: 0,
        message: "no input datasets".to_string(),
    })?;

    // Fuse everything up front, indexed by video id then query id.
    let mut fused: Vec<FusedIndex> = Vec::new();
    for dataset in datasets {
        let mut by_video = HashMap::new();
        for video in &dataset.videos {
            let stack = fuse_video(video)?;
            let by_query: HashMap<&str, ScoreMap> = video
                .queries
                .iter()
                .map(|q| q.query_id.as_str())
                .zip(stack.maps().iter().cloned())
                .collect();
            by_video.insert(video.video_id.as_str(), (video.num_clips, by_query));
        }
        fused.push(by_video);
    }

    let mut videos = Vec::with_capacity(first.videos.len());
    for video in &first.videos {
        let mut queries = Vec::with_capacity(video.queries.len());
        for query in &video.queries {
            let mut members = Vec::with_capacity(datasets.len());
            for (d, by_video) in fused.iter().enumerate() {
                let (num_clips, by_query) =
                    by_video.get(video.video_id.as_str()).ok_or_else(|| {
                        PipelineError::EnsembleMismatch {
                            dataset: d,
                            message: format!("missing video {}", video.video_id),
                        }
                    })?;
                if *num_clips != video.num_clips {
                    return Err(PipelineError::EnsembleMismatch {
                        dataset: d,
                        message: format!(
                            "video {} has {} clips, expected {}",
                            video.video_id, num_clips, video.num_clips
                        ),
                    });
                }
                if by_query.len() != video.queries.len() {
                    return Err(PipelineError::EnsembleMismatch {
                        dataset: d,
                        message: format!(
                            "video {} has {} queries, expected {}",
                            video.video_id,
                            by_query.len(),
                            video.queries.len()
                        ),
                    });
                }
                members.push(by_query.get(query.query_id.as_str()).ok_or_else(|| {
                    PipelineError::EnsembleMismatch {
                        dataset: d,
                        message: format!(
                            "video {} is missing query {}",
                            video.video_id, query.query_id
                        ),
                    }
                })?);
            }
            let mean = mean_score_maps(&members).map_err(|source| PipelineError::Fusion {
                video_id: video.video_id.clone(),
                query_id: query.query_id.clone(),
                source,
            })?;
            queries.push(QueryScores {
                query_id: query.query_id.clone(),
                sentence_scores: mean,
                phrase_scores: vec![],
                importance_logits: None,
            });
        }
        videos.push(VideoScores {
            video_id: video.video_id.clone(),
            num_clips: video.num_clips,
            queries,
        });
    }
    Ok(ScoreDataset { videos })
}

/// Fuses every video of one dataset, yielding a pre-fused dataset.
pub fn fuse_dataset(dataset: &ScoreDataset) -> Result<ScoreDataset, PipelineError> {
    ensemble_scores(std::slice::from_ref(dataset))
}

/// Builds pre-fused score grids from raw features: cosine similarity
/// against the sentence and each phrase, fused under softmaxed importance
/// logits.
pub fn scores_from_features(features: &FeatureDataset) -> Result<ScoreDataset, PipelineError> {
    let mut videos = Vec::with_capacity(features.videos.len());
    for video in &features.videos {
        let mut queries = Vec::with_capacity(video.queries.len());
        for query in &video.queries {
            let map =
                build_query_score_map(&video.features, &query.features).map_err(|source| {
                    PipelineError::Fusion {
                        video_id: video.video_id.clone(),
                        query_id: query.query_id.clone(),
                        source,
                    }
                })?;
            queries.push(QueryScores {
                query_id: query.query_id.clone(),
                sentence_scores: map,
                phrase_scores: vec![],
                importance_logits: None,
            });
        }
        videos.push(VideoScores {
            video_id: video.video_id.clone(),
            num_clips: video.features.num_clips(),
            queries,
        });
    }
    Ok(ScoreDataset { videos })
}

// ---------------------------------------------------------------------------
// Selection

fn build_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction does not fail for sane worker counts")
}

/// Runs the configured selector on every video, in parallel, preserving
/// input order. Returns the assignments and the largest DP table any video
/// allocated.
pub fn select_videos(
    scores: &ScoreDataset,
    cfg: &SelectConfig,
    workers: usize,
) -> Result<(Vec<Assignment>, u64), PipelineError> {
    let peak_bytes = AtomicU64::new(0);
    let pool = build_pool(workers);
    let assignments = pool.install(|| {
        scores
            .videos
            .par_iter()
            .map(|video| -> Result<Assignment, PipelineError> {
                let stack = fuse_video(video)?;
                let wrap = |source| PipelineError::Solver {
                    video_id: video.video_id.clone(),
                    source,
                };
                let logp = score_to_logprob(&stack, cfg.prob_map, cfg.epsilon).map_err(wrap)?;
                let assignment = match cfg.method {
                    SelectMethod::Dp => dp_select(&logp, cfg.max_exact_queries),
                    SelectMethod::Greedy => greedy_select(&logp),
                    SelectMethod::BruteForce => brute_force_select(&logp),
                }
                .map_err(wrap)?;
                if assignment.method == SelectMethod::Dp && !assignment.fallback_used {
                    let bytes = dp_table_bytes(logp.num_queries(), logp.num_clips());
                    peak_bytes.fetch_max(bytes, Ordering::Relaxed);
                }
                Ok(assignment)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok((assignments, peak_bytes.into_inner()))
}

/// Pairs each assignment's entries back with their query ids.
pub fn predictions_from_assignments(
    scores: &ScoreDataset,
    assignments: &[Assignment],
) -> PredictionDataset {
    let videos = scores
        .videos
        .iter()
        .zip(assignments)
        .map(|(video, assignment)| VideoPrediction {
            video_id: video.video_id.clone(),
            method: assignment.method,
            fallback_used: assignment.fallback_used,
            objective: assignment.objective,
            entries: assignment
                .entries
                .iter()
                .map(|entry| PredictionEntry {
                    query_id: video.queries[entry.query_index].query_id.clone(),
                    interval: entry.interval,
                    log_prob: entry.log_prob,
                })
                .collect(),
        })
        .collect();
    PredictionDataset { videos }
}

// ---------------------------------------------------------------------------
// Alignment checks

fn check_alignment(scores: &ScoreDataset, gt: &GroundTruthDataset) -> Result<(), PipelineError> {
    let gt_by_id: HashMap<&str, &VideoGroundTruth> =
        gt.videos.iter().map(|v| (v.video_id.as_str(), v)).collect();
    let score_ids: HashSet<&str> = scores.videos.iter().map(|v| v.video_id.as_str()).collect();
    for gt_video in &gt.videos {
        if !score_ids.contains(gt_video.video_id.as_str()) {
            return Err(PipelineError::ExtraGroundTruthVideo {
                video_id: gt_video.video_id.clone(),
            });
        }
    }
    for video in &scores.videos {
        let gt_video = gt_by_id.get(video.video_id.as_str()).ok_or_else(|| {
            PipelineError::MissingGroundTruthVideo {
                video_id: video.video_id.clone(),
            }
        })?;
        if gt_video.num_clips != video.num_clips {
            return Err(PipelineError::ClipCountMismatch {
                video_id: video.video_id.clone(),
                scores: video.num_clips,
                ground_truth: gt_video.num_clips,
            });
        }
        if gt_video.queries.len() != video.queries.len() {
            return Err(PipelineError::QueryCountMismatch {
                video_id: video.video_id.clone(),
                scores: video.queries.len(),
                ground_truth: gt_video.queries.len(),
            });
        }
        let gt_queries: HashSet<&str> = gt_video
            .queries
            .iter()
            .map(|q| q.query_id.as_str())
            .collect();
        for query in &video.queries {
            if !gt_queries.contains(query.query_id.as_str()) {
                return Err(PipelineError::MissingGroundTruthQuery {
                    video_id: video.video_id.clone(),
                    query_id: query.query_id.clone(),
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Evaluation

/// Composite evaluation key; video ids and query ids are each unique, so
/// the pair is too.
#[derive(PartialEq, Eq, Hash)]
struct QueryKey<'a> {
    video: &'a str,
    query: &'a str,
}

impl std::fmt::Display for QueryKey<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} of video {}", self.query, self.video)
    }
}

/// Scores a prediction set against ground truth. The two must cover
/// exactly the same videos and queries; being strict here keeps recall
/// denominators honest.
pub fn evaluate_predictions(
    predictions: &PredictionDataset,
    gt: &GroundTruthDataset,
    thresholds: &[f64],
) -> Result<EvalReport, PipelineError> {
    if thresholds.is_empty() {
        return Err(PipelineError::EmptyThresholds);
    }
    let gt_by_id: HashMap<&str, &VideoGroundTruth> =
        gt.videos.iter().map(|v| (v.video_id.as_str(), v)).collect();
    let predicted_ids: HashSet<&str> = predictions
        .videos
        .iter()
        .map(|v| v.video_id.as_str())
        .collect();
    for gt_video in &gt.videos {
        if !predicted_ids.contains(gt_video.video_id.as_str()) {
            return Err(PipelineError::MissingPredictionVideo {
                video_id: gt_video.video_id.clone(),
            });
        }
    }

    let mut predicted_pairs = Vec::new();
    let mut truth_pairs = Vec::new();
    let mut per_video = Vec::with_capacity(predictions.videos.len());
    for video in &predictions.videos {
        let gt_video = gt_by_id.get(video.video_id.as_str()).ok_or_else(|| {
            PipelineError::ExtraPredictionVideo {
                video_id: video.video_id.clone(),
            }
        })?;
        if video.entries.len() != gt_video.queries.len() {
            return Err(PipelineError::PredictionCountMismatch {
                video_id: video.video_id.clone(),
                predictions: video.entries.len(),
                ground_truth: gt_video.queries.len(),
            });
        }
        let predicted_queries: HashSet<&str> =
            video.entries.iter().map(|e| e.query_id.as_str()).collect();
        for gt_query in &gt_video.queries {
            if !predicted_queries.contains(gt_query.query_id.as_str()) {
                return Err(PipelineError::MissingPrediction {
                    video_id: video.video_id.clone(),
                    query_id: gt_query.query_id.clone(),
                });
            }
            truth_pairs.push((
                QueryKey {
                    video: &gt_video.video_id,
                    query: &gt_query.query_id,
                },
                gt_query.interval,
            ));
        }
        for entry in &video.entries {
            if !entry.interval.fits(gt_video.num_clips) {
                return Err(PipelineError::PredictionOutOfRange {
                    video_id: video.video_id.clone(),
                    query_id: entry.query_id.clone(),
                    num_clips: gt_video.num_clips,
                });
            }
            predicted_pairs.push((
                QueryKey {
                    video: &video.video_id,
                    query: &entry.query_id,
                },
                entry.interval,
            ));
        }
        per_video.push(Assignment {
            video_id: video.video_id.clone(),
            entries: video
                .entries
                .iter()
                .enumerate()
                .map(|(index, e)| AssignmentEntry {
                    query_index: index,
                    interval: e.interval,
                    log_prob: e.log_prob,
                })
                .collect(),
            objective: video.objective,
            method: video.method,
            fallback_used: video.fallback_used,
        });
    }

    let mut recall_at = Vec::with_capacity(thresholds.len());
    for &threshold in thresholds {
        let recall = recall_at_iou(&predicted_pairs, &truth_pairs, threshold)?;
        recall_at.push(RecallEntry { threshold, recall });
    }
    let recalls: Vec<f64> = recall_at.iter().map(|r| r.recall).collect();
    Ok(EvalReport {
        avg: average_recall(&recalls)?,
        overlap_fraction: overlap_fraction(&per_video),
        num_videos: predictions.videos.len(),
        num_queries: predicted_pairs.len(),
        fallback_count: predictions
            .videos
            .iter()
            .filter(|v| v.fallback_used)
            .count(),
        recall_at,
    })
}

// ---------------------------------------------------------------------------
// The pipeline

pub fn run_pipeline(
    scores: &ScoreDataset,
    gt: &GroundTruthDataset,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    let started = Instant::now();
    if scores.videos.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    check_alignment(scores, gt)?;

    let select_started = Instant::now();
    let (assignments, peak_dp_table_bytes) = select_videos(scores, &cfg.select, cfg.workers)?;
    let select_ms = select_started.elapsed().as_millis() as u64;

    let predictions = predictions_from_assignments(scores, &assignments);
    let report = evaluate_predictions(&predictions, gt, &cfg.thresholds)?;
    Ok(PipelineOutcome {
        report,
        predictions,
        counters: RuntimeCounters {
            wall_ms: started.elapsed().as_millis() as u64,
            select_ms,
            peak_dp_table_bytes,
        },
    })
}

/// File-level wrapper: reads scores and ground truth, runs the pipeline,
/// and writes whatever outputs were requested.
pub fn run_pipeline_files(
    scores_path: &Path,
    gt_path: &Path,
    predictions_out: Option<&Path>,
    report_out: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    let scores = format::read_scores(scores_path)?;
    let gt = format::read_ground_truth(gt_path)?;
    let outcome = run_pipeline(&scores, &gt, cfg)?;
    if let Some(path) = predictions_out {
        format::write_predictions(path, &outcome.predictions)?;
    }
    if let Some(path) = report_out {
        let file = ReportFile {
            format_version: FORMAT_VERSION,
            config: cfg.clone(),
            report: outcome.report.clone(),
            counters: outcome.counters,
        };
        let mut bytes = serde_json::to_vec_pretty(&file).expect("report serializes");
        bytes.push(b'\n');
        std::fs::write(path, bytes).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(outcome)
}

/// Human-readable rendering of a report, for terminal output.
/// Pass `None` for the counters when the numbers come from a stored
/// prediction file rather than a timed solver run.
pub fn render_report(report: &EvalReport, counters: Option<&RuntimeCounters>) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "videos            {:>10}", report.num_videos);
    let _ = writeln!(out, "queries           {:>10}", report.num_queries);
    let _ = writeln!(out, "solver fallbacks  {:>10}", report.fallback_count);
    for entry in &report.recall_at {
        let _ = writeln!(
            out,
            "R@1 IoU={:<4}      {:>10.2}",
            entry.threshold, entry.recall
        );
    }
    let _ = writeln!(out, "AVG               {:>10.2}", report.avg);
    let _ = writeln!(out, "overlap %         {:>10.2}", report.overlap_fraction);
    if let Some(counters) = counters {
        let _ = writeln!(out, "select time       {:>8} ms", counters.select_ms);
        let _ = writeln!(out, "wall time         {:>8} ms", counters.wall_ms);
        let _ = writeln!(
            out,
            "peak DP tables    {:>10} bytes",
            counters.peak_dp_table_bytes
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Loss reporting

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoLoss {
    pub video_id: String,
    pub num_queries: usize,
    /// Mean cross-entropy over this video's queries.
    pub bce: f64,
    pub exclusiveness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub format_version: u32,
    pub config: LossConfig,
    pub prob_map: ProbMap,
    pub epsilon: f64,
    pub num_queries: usize,
    /// Mean cross-entropy over all queries of all videos.
    pub bce: f64,
    /// Mean exclusiveness over videos.
    pub exclusiveness: f64,
    /// Externally supplied mutual-matching term, echoed into the total.
    pub matching: f64,
    pub total: f64,
    pub per_video: Vec<VideoLoss>,
}

/// Scores a dataset against ground truth with the training objective:
/// per-query cross-entropy against IoU targets plus the per-video
/// exclusiveness penalty, combined with the supplied matching term.
pub fn compute_losses(
    scores: &ScoreDataset,
    gt: &GroundTruthDataset,
    loss_cfg: &LossConfig,
    prob_map: ProbMap,
    epsilon: f64,
    matching: f64,
) -> Result<LossReport, PipelineError> {
    if scores.videos.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    if !matching.is_finite() {
        return Err(PipelineError::NonFiniteMatching(matching));
    }
    check_alignment(scores, gt)?;
    let gt_by_id: HashMap<&str, &VideoGroundTruth> =
        gt.videos.iter().map(|v| (v.video_id.as_str(), v)).collect();

    let mut per_video = Vec::with_capacity(scores.videos.len());
    let mut bce_sum = 0.0;
    let mut exc_sum = 0.0;
    let mut total_queries = 0usize;
    for video in &scores.videos {
        let gt_video = gt_by_id[video.video_id.as_str()];
        let gt_interval: HashMap<&str, ClipInterval> = gt_video
            .queries
            .iter()
            .map(|q| (q.query_id.as_str(), q.interval))
            .collect();
        let stack = fuse_video(video)?;

        let mut video_bce = 0.0;
        let mut prob_maps = Vec::with_capacity(video.queries.len());
        for (query, fused) in video.queries.iter().zip(stack.maps()) {
            let wrap = |source| PipelineError::Loss {
                video_id: video.video_id.clone(),
                query_id: query.query_id.clone(),
                source,
            };
            let pred = to_bounded_probabilities(fused, prob_map, epsilon)?;
            let target = iou_targets(
                video.num_clips,
                &gt_interval[query.query_id.as_str()],
                loss_cfg,
            )
            .map_err(&wrap)?;
            video_bce += bce_loss(&pred, &target).map_err(&wrap)?;
            prob_maps.push(to_probabilities(fused, prob_map, epsilon)?);
        }
        let prob_stack = ScoreStack::new(video.video_id.clone(), prob_maps).map_err(|source| {
            PipelineError::Stack {
                video_id: video.video_id.clone(),
                source,
            }
        })?;
        let exclusiveness =
            exclusiveness_loss(&prob_stack).map_err(|source| PipelineError::Loss {
                video_id: video.video_id.clone(),
                query_id: String::new(),
                source,
            })?;

        bce_sum += video_bce;
        exc_sum += exclusiveness;
        total_queries += video.queries.len();
        per_video.push(VideoLoss {
            video_id: video.video_id.clone(),
            num_queries: video.queries.len(),
            bce: video_bce / video.queries.len() as f64,
            exclusiveness,
        });
    }

    let bce = bce_sum / total_queries as f64;
    let exclusiveness = exc_sum / scores.videos.len() as f64;
    Ok(LossReport {
        format_version: FORMAT_VERSION,
        config: *loss_cfg,
        prob_map,
        epsilon,
        num_queries: total_queries,
        bce,
        exclusiveness,
        matching,
        total: total_loss(bce, matching, exclusiveness, loss_cfg),
        per_video,
    })
}

/// Human-readable rendering of a loss report, for terminal output.
pub fn render_loss(report: &LossReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "videos            {:>14}", report.per_video.len());
    let _ = writeln!(out, "queries           {:>14}", report.num_queries);
    let _ = writeln!(out, "bce               {:>14.6}", report.bce);
    let _ = writeln!(out, "exclusiveness     {:>14.6}", report.exclusiveness);
    let _ = writeln!(out, "matching          {:>14.6}", report.matching);
    let _ = writeln!(out, "total             {:>14.6}", report.total);
    out
}
