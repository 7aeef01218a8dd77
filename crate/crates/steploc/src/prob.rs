//! Score-to-probability calibration.
//!
//! Raw fused scores are cosine-derived and roughly `[0, 1]`-calibrated but
//! carry no probabilistic meaning on their own. Before the solver can sum
//! log-probabilities, and before cross-entropy can consume predictions,
//! scores pass through one of three monotone mappings. `Clamp` is the
//! default: it is the identity on `[ε, 1]` and therefore preserves argmax
//! ordering of nonnegative scores exactly.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::ScoreMap;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("epsilon must lie in (0, 1), got {value}")]
    InvalidEpsilon { value: f64 },

    #[error("epsilon must lie in (0, 0.5) for two-sided clamping, got {value}")]
    EpsilonTooLarge { value: f64 },
}

/// How a raw score becomes a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbMap {
    /// `p = clamp(score, ε, 1)` — identity on calibrated scores.
    Clamp,
    /// `p = 1 / (1 + e^{-score})` — for unbounded scores.
    Sigmoid,
    /// Per-map affine rescale of the valid cells onto `[ε, 1]`.
    MinMax,
}

impl std::fmt::Display for ProbMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProbMap::Clamp => "clamp",
            ProbMap::Sigmoid => "sigmoid",
            ProbMap::MinMax => "minmax",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
#[error("unknown probability mapping {0:?}; expected clamp, sigmoid, or minmax")]
pub struct UnknownProbMap(String);

impl FromStr for ProbMap {
    type Err = UnknownProbMap;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clamp" => Ok(ProbMap::Clamp),
            "sigmoid" => Ok(ProbMap::Sigmoid),
            "minmax" => Ok(ProbMap::MinMax),
            other => Err(UnknownProbMap(other.to_string())),
        }
    }
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<(), ProbError> {
    if epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(ProbError::InvalidEpsilon { value: epsilon })
    }
}

/// Maps every valid cell into `[ε, 1]`.
///
/// A constant map under `MinMax` has no spread to rescale; it maps to the
/// upper bound 1.
pub fn to_probabilities(
    map: &ScoreMap,
    mode: ProbMap,
    epsilon: f64,
) -> Result<ScoreMap, ProbError> {
    validate_epsilon(epsilon)?;
    Ok(apply(map, mode, epsilon, 1.0))
}

/// Maps every valid cell into `[ε, 1−ε]`, the open-interval form
/// cross-entropy needs. Requires `ε < 0.5`.
pub fn to_bounded_probabilities(
    map: &ScoreMap,
    mode: ProbMap,
    epsilon: f64,
) -> Result<ScoreMap, ProbError> {
    validate_epsilon(epsilon)?;
    if epsilon >= 0.5 {
        return Err(ProbError::EpsilonTooLarge { value: epsilon });
    }
    Ok(apply(map, mode, epsilon, 1.0 - epsilon))
}

fn apply(map: &ScoreMap, mode: ProbMap, lo: f64, hi: f64) -> ScoreMap {
    match mode {
        ProbMap::Clamp => map.map_valid(|_, _, v| v.clamp(lo, hi)),
        ProbMap::Sigmoid => map.map_valid(|_, _, v| sigmoid(v).clamp(lo, hi)),
        ProbMap::MinMax => {
            let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
            for (_, _, v) in map.valid_cells() {
                min = min.min(v);
                max = max.max(v);
            }
            if max > min {
                let scale = (hi - lo) / (max - min);
                map.map_valid(|_, _, v| (lo + (v - min) * scale).clamp(lo, hi))
            } else {
                // No spread to rescale; every cell sits at the upper bound.
                map.map_valid(|_, _, _| hi)
            }
        }
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(v))`, computed without underflow for any finite `v`.
pub(crate) fn log_sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        -(-v).exp().ln_1p()
    } else {
        v - v.exp().ln_1p()
    }
}
