//! Synthetic datasets: seeded score files with known ground truth.
//!
//! Every video gets K disjoint ground-truth intervals drawn uniformly
//! among all feasible disjoint placements, then one score grid per query
//! whose cells are `clamp(iou^sharpness + Normal(0, sigma), 0, 1)` —
//! a peaked-at-truth landscape with controllable blur.
//!
//! All randomness flows from the single `seed` through one ChaCha8
//! stream in a fixed order (per video: query count, placement, then
//! per-query noise in row-major cell order), so identical specs produce
//! identical datasets, bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{
    GroundTruthDataset, GroundTruthQuery, QueryScores, ScoreDataset, VideoGroundTruth, VideoScores,
};
use crate::interval::ClipInterval;
use crate::types::ScoreMap;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("num_videos must be at least 1")]
    ZeroVideos,

    #[error("num_clips must be at least 1")]
    ZeroClips,

    #[error("query range [{min}, {max}] is empty or starts at 0")]
    BadQueryRange { min: usize, max: usize },

    #[error("{max} queries cannot fit disjointly into {num_clips} clips")]
    InfeasibleQueries { max: usize, num_clips: usize },

    #[error("noise_sigma must be finite and >= 0, got {0}")]
    BadSigma(f64),

    #[error("score_sharpness must be finite and > 0, got {0}")]
    BadSharpness(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_videos: usize,
    pub num_clips: usize,
    /// Inclusive bounds on the per-video query count.
    pub queries_min: usize,
    pub queries_max: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Exponent applied to the IoU before noise; higher = sharper peak.
    pub score_sharpness: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_videos: 20,
            num_clips: 32,
            queries_min: 2,
            queries_max: 5,
            noise_sigma: 0.05,
            seed: 0,
            score_sharpness: 2.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.num_videos == 0 {
            return Err(SynthError::ZeroVideos);
        }
        if self.num_clips == 0 {
            return Err(SynthError::ZeroClips);
        }
        if self.queries_min == 0 || self.queries_min > self.queries_max {
            return Err(SynthError::BadQueryRange {
                min: self.queries_min,
                max: self.queries_max,
            });
        }
        if self.queries_max > self.num_clips {
            return Err(SynthError::InfeasibleQueries {
                max: self.queries_max,
                num_clips: self.num_clips,
            });
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(SynthError::BadSigma(self.noise_sigma));
        }
        if !self.score_sharpness.is_finite() || self.score_sharpness <= 0.0 {
            return Err(SynthError::BadSharpness(self.score_sharpness));
        }
        Ok(())
    }
}

/// Draws K disjoint intervals over `num_clips` clips, uniformly among all
/// disjoint placements.
///
/// Works through a bijection: sorted intervals `[s_0,e_0] .. [s_{K-1},e_{K-1}]`
/// with `e_j < s_{j+1}` map one-to-one onto 2K-subsets of
/// `{0, .., num_clips+K-1}` via `a_j = s_j + j`, `b_j = e_j + j + 1`, so a
/// uniform subset yields a uniform placement.
fn sample_disjoint_intervals(
    rng: &mut ChaCha8Rng,
    num_clips: usize,
    k: usize,
) -> Vec<ClipInterval> {
    let mut picks = rand::seq::index::sample(rng, num_clips + k, 2 * k).into_vec();
    picks.sort_unstable();
    (0..k)
        .map(|j| {
            let start = picks[2 * j] - j;
            let end = picks[2 * j + 1] - j - 1;
            ClipInterval::new(start, end).expect("bijection yields valid intervals")
        })
        .collect()
}

pub fn generate_synthetic(
    spec: &SyntheticSpec,
) -> Result<(ScoreDataset, GroundTruthDataset), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("validated sigma"))
    } else {
        None
    };

    let mut score_videos = Vec::with_capacity(spec.num_videos);
    let mut gt_videos = Vec::with_capacity(spec.num_videos);
    for v in 0..spec.num_videos {
        let video_id = format!("v{v:04}");
        let k = rng.random_range(spec.queries_min..=spec.queries_max);
        let intervals = sample_disjoint_intervals(&mut rng, spec.num_clips, k);

        let mut queries = Vec::with_capacity(k);
        let mut gt_queries = Vec::with_capacity(k);
        for (q, gt) in intervals.into_iter().enumerate() {
            let map = ScoreMap::from_fn(spec.num_clips, |start, end| {
                let proposal = ClipInterval::new(start, end).expect("valid cell");
                let mut score = proposal.iou(&gt).powf(spec.score_sharpness);
                if let Some(noise) = &noise {
                    score += noise.sample(&mut rng);
                }
                score.clamp(0.0, 1.0)
            });
            let query_id = format!("q{q:03}");
            queries.push(QueryScores {
                query_id: query_id.clone(),
                sentence_scores: map,
                phrase_scores: vec![],
                importance_logits: None,
            });
            gt_queries.push(GroundTruthQuery {
                query_id,
                interval: gt,
            });
        }
        score_videos.push(VideoScores {
            video_id: video_id.clone(),
            num_clips: spec.num_clips,
            queries,
        });
        gt_videos.push(VideoGroundTruth {
            video_id,
            num_clips: spec.num_clips,
            queries: gt_queries,
        });
    }
    Ok((
        ScoreDataset {
            videos: score_videos,
        },
        GroundTruthDataset { videos: gt_videos },
    ))
}
