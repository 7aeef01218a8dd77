//! Grounding step queries on a 2D temporal proposal grid: score-map
//! fusion, exact non-overlapping interval assignment, and recall
//! evaluation.
//!
//! A video is `N` consecutive clips; a proposal is a clip interval
//! `(start, end)` with `start <= end`, both 0-based and inclusive, so the
//! proposals form the upper triangle of an `N × N` grid. Each of a video's
//! `K` step queries carries a score grid over those proposals. The crate:
//!
//! * fuses sentence- and phrase-level score grids under softmaxed
//!   importance weights, and builds such grids from raw features by cosine
//!   similarity ([`fusion`]);
//! * converts scores to log-probabilities ([`prob`], [`solver`]) and picks
//!   one proposal per query maximizing total log-probability subject to
//!   pairwise non-overlap — exactly, by dynamic programming over query
//!   subsets in `O(2^K · N² · K)`, with a greedy baseline and a brute-force
//!   oracle ([`solver`]);
//! * scores training-style objectives: IoU-rescaled cross-entropy and an
//!   exclusiveness penalty ([`losses`]);
//! * evaluates R@1 at IoU thresholds, their average, and the fraction of
//!   overlapping predictions ([`metrics`]);
//! * reads and writes the score/ground-truth/prediction file formats
//!   ([`format`]), generates synthetic datasets ([`synth`]), runs the
//!   fuse→select→evaluate pipeline concurrently and deterministically
//!   ([`pipeline`]), and benchmarks solver scaling ([`bench`]).

pub mod bench;
pub mod error;
pub mod format;
pub mod fusion;
pub mod interval;
pub mod losses;
pub mod metrics;
pub mod pipeline;
pub mod prob;
pub mod solver;
pub mod synth;
pub mod types;

pub use error::CoreError;
pub use interval::{interval_iou, intervals_overlap, ClipInterval};
pub use prob::ProbMap;
pub use solver::{
    brute_force_select, dp_select, greedy_select, score_to_logprob, LogProbStack,
    DEFAULT_MAX_EXACT_QUERIES,
};
pub use types::{
    Assignment, AssignmentEntry, QueryFeatures, ScoreMap, ScoreStack, SelectMethod,
    TemporalFeatureMap,
};
