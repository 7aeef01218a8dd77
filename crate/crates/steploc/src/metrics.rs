//! Evaluation: recall at IoU thresholds, their average, and the
//! cross-query overlap statistic.
//!
//! Every metric is a percentage in `[0, 100]`. Recall is R@1: each query
//! contributes its single predicted interval, which either clears the IoU
//! threshold against its ground truth or does not. The overlap statistic
//! counts a query once if its prediction overlaps any other prediction in
//! the same video, no matter how many.

use std::collections::{HashMap, HashSet};
use std::fmt::Display;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{interval_iou, ClipInterval};
use crate::types::Assignment;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction for query {query} has no ground truth")]
    MissingGroundTruth { query: String },

    #[error("duplicate ground-truth entry for query {query}")]
    DuplicateGroundTruth { query: String },

    #[error("duplicate prediction for query {query}")]
    DuplicatePrediction { query: String },

    #[error("no predictions to evaluate")]
    EmptyPredictions,

    #[error("cannot average an empty recall list")]
    EmptyRecallList,

    #[error("IoU threshold must lie in [0, 1], got {value}")]
    InvalidThreshold { value: f64 },
}

/// One recall figure at one IoU threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecallEntry {
    pub threshold: f64,
    pub recall: f64,
}

/// The full evaluation summary for a prediction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// R@1 per IoU threshold, in the threshold order given.
    pub recall_at: Vec<RecallEntry>,
    /// Arithmetic mean of the recall values.
    pub avg: f64,
    /// Percentage of queries whose prediction overlaps another prediction
    /// in the same video.
    pub overlap_fraction: f64,
    pub num_videos: usize,
    pub num_queries: usize,
    /// Videos where the solver fell back to the greedy baseline.
    pub fallback_count: usize,
}

/// R@1 at a single threshold: the percentage of queries whose predicted
/// interval reaches IoU ≥ `threshold` against their ground truth.
pub fn recall_at_iou<Q: Eq + Hash + Display>(
    predictions: &[(Q, ClipInterval)],
    ground_truth: &[(Q, ClipInterval)],
    threshold: f64,
) -> Result<f64, MetricsError> {
    if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) {
        return Err(MetricsError::InvalidThreshold { value: threshold });
    }
    if predictions.is_empty() {
        return Err(MetricsError::EmptyPredictions);
    }
    let mut gt_by_query: HashMap<&Q, &ClipInterval> = HashMap::with_capacity(ground_truth.len());
    for (query, interval) in ground_truth {
        if gt_by_query.insert(query, interval).is_some() {
            return Err(MetricsError::DuplicateGroundTruth {
                query: query.to_string(),
            });
        }
    }
    let mut seen: HashSet<&Q> = HashSet::with_capacity(predictions.len());
    let mut hits = 0usize;
    for (query, predicted) in predictions {
        if !seen.insert(query) {
            return Err(MetricsError::DuplicatePrediction {
                query: query.to_string(),
            });
        }
        let gt = gt_by_query
            .get(query)
            .ok_or_else(|| MetricsError::MissingGroundTruth {
                query: query.to_string(),
            })?;
        if interval_iou(predicted, gt) >= threshold {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / predictions.len() as f64)
}

/// Arithmetic mean of recall percentages.
pub fn average_recall(recalls: &[f64]) -> Result<f64, MetricsError> {
    if recalls.is_empty() {
        return Err(MetricsError::EmptyRecallList);
    }
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

/// Percentage of queries whose predicted interval overlaps at least one
/// other predicted interval of the same video. Zero when there are no
/// queries at all.
pub fn overlap_fraction(per_video: &[Assignment]) -> f64 {
    let mut overlapping = 0usize;
    let mut total = 0usize;
    for assignment in per_video {
        overlapping += assignment.overlapping_entries().len();
        total += assignment.entries.len();
    }
    if total == 0 {
        0.0
    } else {
        100.0 * overlapping as f64 / total as f64
    }
}
