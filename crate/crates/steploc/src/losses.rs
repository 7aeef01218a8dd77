//! Training-objective terms as pure score functions.
//!
//! Three pieces: scaled-IoU supervision targets over the proposal grid
//! ([`iou_targets`]), binary cross-entropy between mapped predictions and
//! those targets ([`bce_loss`], with a hand-written gradient for
//! verification), and an exclusiveness penalty that pushes different
//! queries away from claiming the same proposal ([`exclusiveness_loss`]).
//! [`total_loss`] combines them with a mutual-matching term that is
//! supplied externally as a scalar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::CoreError;
use crate::interval::{interval_iou, ClipInterval};
use crate::types::{ScoreMap, ScoreStack};

#[derive(Debug, Error)]
pub enum LossError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("invalid loss config: {reason}")]
    InvalidConfig { reason: &'static str },

    #[error("prediction and target grids differ: {expected} vs {got} clips")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("prediction at ({start}, {end}) is {value}, outside the open interval (0, 1)")]
    PredOutOfRange {
        start: usize,
        end: usize,
        value: f64,
    },

    #[error("target at ({start}, {end}) is {value}, outside [0, 1]")]
    TargetOutOfRange {
        start: usize,
        end: usize,
        value: f64,
    },

    #[error("query {query} score at ({start}, {end}) is {value}, outside [0, 1]")]
    ScoreOutOfRange {
        query: usize,
        start: usize,
        end: usize,
        value: f64,
    },
}

/// Weights and supervision scaling for the combined objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Weight of the externally supplied mutual-matching term.
    pub alpha: f64,
    /// Weight of the exclusiveness term.
    pub beta: f64,
    /// IoU at or below this maps to target 0.
    pub iou_scale_min: f64,
    /// IoU at or above this maps to target 1.
    pub iou_scale_max: f64,
}

impl LossConfig {
    pub fn new(
        alpha: f64,
        beta: f64,
        iou_scale_min: f64,
        iou_scale_max: f64,
    ) -> Result<Self, LossError> {
        let cfg = Self {
            alpha,
            beta,
            iou_scale_min,
            iou_scale_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LossError> {
        let fail = |reason| Err(LossError::InvalidConfig { reason });
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return fail("alpha must be finite and >= 0");
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return fail("beta must be finite and >= 0");
        }
        if !self.iou_scale_min.is_finite() || !(0.0..1.0).contains(&self.iou_scale_min) {
            return fail("iou_scale_min must lie in [0, 1)");
        }
        if !self.iou_scale_max.is_finite()
            || self.iou_scale_max <= self.iou_scale_min
            || self.iou_scale_max > 1.0
        {
            return fail("iou_scale_max must lie in (iou_scale_min, 1]");
        }
        Ok(())
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.05,
            iou_scale_min: 0.5,
            iou_scale_max: 1.0,
        }
    }
}

/// Supervision grid for one ground-truth interval: IoU against every
/// proposal, rescaled so `iou_scale_min → 0` and `iou_scale_max → 1`,
/// clamped to `[0, 1]`.
pub fn iou_targets(
    num_clips: usize,
    gt: &ClipInterval,
    cfg: &LossConfig,
) -> Result<ScoreMap, LossError> {
    cfg.validate()?;
    if !gt.fits(num_clips) {
        return Err(CoreError::IntervalOutOfRange {
            start: gt.start(),
            end: gt.end(),
            num_clips,
        }
        .into());
    }
    let span = cfg.iou_scale_max - cfg.iou_scale_min;
    Ok(ScoreMap::from_fn(num_clips, |start, end| {
        let proposal = ClipInterval::new(start, end).expect("grid cells are ordered");
        ((interval_iou(&proposal, gt) - cfg.iou_scale_min) / span).clamp(0.0, 1.0)
    }))
}

/// Mean binary cross-entropy over valid cells. Predictions must already be
/// mapped into the open interval (0, 1).
pub fn bce_loss(pred: &ScoreMap, target: &ScoreMap) -> Result<f64, LossError> {
    check_bce_inputs(pred, target)?;
    let mut sum = 0.0;
    for ((_, _, p), (_, _, t)) in pred.valid_cells().zip(target.valid_cells()) {
        sum -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
    }
    Ok(sum / pred.num_valid() as f64)
}

/// Analytic gradient of [`bce_loss`] with respect to each prediction cell:
/// `(-t/p + (1-t)/(1-p)) / M` with `M` the valid-cell count.
pub fn bce_grad(pred: &ScoreMap, target: &ScoreMap) -> Result<ScoreMap, LossError> {
    check_bce_inputs(pred, target)?;
    let m = pred.num_valid() as f64;
    Ok(pred.map_valid(|start, end, p| {
        let t = target.get(start, end).unwrap();
        (-t / p + (1.0 - t) / (1.0 - p)) / m
    }))
}

fn check_bce_inputs(pred: &ScoreMap, target: &ScoreMap) -> Result<(), LossError> {
    if pred.num_clips() != target.num_clips() {
        return Err(LossError::ShapeMismatch {
            expected: pred.num_clips(),
            got: target.num_clips(),
        });
    }
    for (start, end, p) in pred.valid_cells() {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(LossError::PredOutOfRange {
                start,
                end,
                value: p,
            });
        }
    }
    for (start, end, t) in target.valid_cells() {
        if !t.is_finite() || !(0.0..=1.0).contains(&t) {
            return Err(LossError::TargetOutOfRange {
                start,
                end,
                value: t,
            });
        }
    }
    Ok(())
}

/// Mean over valid cells of the product of the two largest scores across
/// the video's queries. Zero exactly when no cell is claimed by more than
/// one query; defined as zero for a single query.
///
/// Scores must be pre-mapped to `[0, 1]` so the product is a bounded,
/// nonnegative penalty.
pub fn exclusiveness_loss(stack: &ScoreStack) -> Result<f64, LossError> {
    for (query, map) in stack.maps().iter().enumerate() {
        for (start, end, v) in map.valid_cells() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(LossError::ScoreOutOfRange {
                    query,
                    start,
                    end,
                    value: v,
                });
            }
        }
    }
    if stack.num_queries() == 1 {
        return Ok(0.0);
    }
    let n = stack.num_clips();
    let mut sum = 0.0;
    for start in 0..n {
        for end in start..n {
            let mut top1 = f64::NEG_INFINITY;
            let mut top2 = f64::NEG_INFINITY;
            for map in stack.maps() {
                let v = map.get(start, end).unwrap();
                if v > top1 {
                    top2 = top1;
                    top1 = v;
                } else if v > top2 {
                    top2 = v;
                }
            }
            sum += top1 * top2;
        }
    }
    Ok(sum / (n * (n + 1) / 2) as f64)
}

/// Combined objective: `bce + alpha * mm + beta * exc`. The
/// mutual-matching term is an externally computed scalar.
pub fn total_loss(bce: f64, mm: f64, exc: f64, cfg: &LossConfig) -> f64 {
    bce + cfg.alpha * mm + cfg.beta * exc
}
