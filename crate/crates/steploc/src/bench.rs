//! Scaling benchmark for the exact solver.
//!
//! Work per instance is `O(2^K · N² · K)`, so one extra query should
//! roughly double the time and doubling the clip count should roughly
//! quadruple it. The benchmark times `(K, N)`, `(K+1, N)`, and `(K, 2N)`
//! on random feasible instances and reports both measured ratios against
//! their expected bands. At small K the `+1` ratio also carries the
//! linear K factor — the theoretical step is `2(K+1)/K` — so the band is
//! meaningful from roughly K = 3 upwards, and tightest for K ≥ 8.
//!
//! Selection runs on one thread so the ratios reflect algorithmic work,
//! not scheduler behavior, and each point takes the minimum over
//! `repeats` runs to shed scheduling noise.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::FORMAT_VERSION;
use crate::solver::{dp_select, dp_table_bytes, LogProbStack, DEFAULT_MAX_EXACT_QUERIES};
use crate::types::SelectMethod;

/// Acceptable measured range for time(K+1, N) / time(K, N).
pub const QUERY_SCALING_BAND: (f64, f64) = (1.6, 2.8);
/// Acceptable measured range for time(K, 2N) / time(K, N).
pub const CLIP_SCALING_BAND: (f64, f64) = (3.0, 5.5);

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repeats must be at least 1")]
    ZeroRepeats,

    #[error("num_queries must be at least 1")]
    ZeroQueries,

    #[error("benchmark needs num_queries + 1 = {requested} within the exact-solver cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error(
        "the scaled instance needs num_queries + 1 = {queries} <= num_clips = {num_clips} \
         to stay exactly solvable"
    )]
    TooFewClips { queries: usize, num_clips: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub num_queries: usize,
    pub num_clips: usize,
    /// Each point reports the fastest of this many timed runs.
    pub repeats: usize,
    pub seed: u64,
    /// Upper bound on the exact solver's query count, checked up front.
    pub cap: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            num_queries: 8,
            num_clips: 64,
            repeats: 5,
            seed: 0,
            cap: DEFAULT_MAX_EXACT_QUERIES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub num_queries: usize,
    pub num_clips: usize,
    /// Fastest observed wall time, seconds.
    pub min_seconds: f64,
    /// DP table footprint for this instance size.
    pub table_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub format_version: u32,
    pub base: BenchPoint,
    pub more_queries: BenchPoint,
    pub more_clips: BenchPoint,
    /// time(K+1, N) / time(K, N).
    pub query_ratio: f64,
    /// time(K, 2N) / time(K, N).
    pub clip_ratio: f64,
    pub query_band: (f64, f64),
    pub clip_band: (f64, f64),
    pub query_ratio_in_band: bool,
    pub clip_ratio_in_band: bool,
}

/// A dense random instance: every valid cell gets a finite log-probability,
/// so the exact solver always runs (K ≤ N makes it feasible).
fn random_instance(rng: &mut ChaCha8Rng, num_queries: usize, num_clips: usize) -> LogProbStack {
    let mut values = vec![f64::NEG_INFINITY; num_queries * num_clips * num_clips];
    for query in 0..num_queries {
        for start in 0..num_clips {
            for end in start..num_clips {
                values[(query * num_clips + start) * num_clips + end] =
                    rng.random_range(-5.0..-0.01);
            }
        }
    }
    LogProbStack::new("bench", num_queries, num_clips, values)
        .expect("dense instances are always well-formed")
}

fn measure(
    rng: &mut ChaCha8Rng,
    num_queries: usize,
    num_clips: usize,
    repeats: usize,
    cap: usize,
) -> BenchPoint {
    let instance = random_instance(rng, num_queries, num_clips);
    // Warm-up run: faults in the allocations and verifies the instance
    // actually exercises the exact path.
    let warmup = dp_select(&instance, cap).expect("dense instance solves");
    assert!(
        warmup.method == SelectMethod::Dp && !warmup.fallback_used,
        "benchmark instance unexpectedly fell back to greedy"
    );
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        let started = Instant::now();
        let assignment = dp_select(&instance, cap).expect("dense instance solves");
        let elapsed = started.elapsed().as_secs_f64();
        std::hint::black_box(assignment);
        best = best.min(elapsed);
    }
    BenchPoint {
        num_queries,
        num_clips,
        min_seconds: best,
        table_bytes: dp_table_bytes(num_queries, num_clips),
    }
}

pub fn bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    if cfg.repeats == 0 {
        return Err(BenchError::ZeroRepeats);
    }
    if cfg.num_queries == 0 {
        return Err(BenchError::ZeroQueries);
    }
    if cfg.num_queries + 1 > cfg.cap {
        return Err(BenchError::CapExceeded {
            requested: cfg.num_queries + 1,
            cap: cfg.cap,
        });
    }
    if cfg.num_queries + 1 > cfg.num_clips {
        return Err(BenchError::TooFewClips {
            queries: cfg.num_queries + 1,
            num_clips: cfg.num_clips,
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool");
    let report = pool.install(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let base = measure(
            &mut rng,
            cfg.num_queries,
            cfg.num_clips,
            cfg.repeats,
            cfg.cap,
        );
        let more_queries = measure(
            &mut rng,
            cfg.num_queries + 1,
            cfg.num_clips,
            cfg.repeats,
            cfg.cap,
        );
        let more_clips = measure(
            &mut rng,
            cfg.num_queries,
            cfg.num_clips * 2,
            cfg.repeats,
            cfg.cap,
        );
        let query_ratio = more_queries.min_seconds / base.min_seconds;
        let clip_ratio = more_clips.min_seconds / base.min_seconds;
        BenchReport {
            format_version: FORMAT_VERSION,
            base,
            more_queries,
            more_clips,
            query_ratio,
            clip_ratio,
            query_band: QUERY_SCALING_BAND,
            clip_band: CLIP_SCALING_BAND,
            query_ratio_in_band: QUERY_SCALING_BAND.0 <= query_ratio
                && query_ratio <= QUERY_SCALING_BAND.1,
            clip_ratio_in_band: CLIP_SCALING_BAND.0 <= clip_ratio
                && clip_ratio <= CLIP_SCALING_BAND.1,
        }
    });
    Ok(report)
}

/// Terminal rendering of a benchmark report.
pub fn render_bench(report: &BenchReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (label, point) in [
        ("base", &report.base),
        ("K+1 ", &report.more_queries),
        ("2N  ", &report.more_clips),
    ] {
        let _ = writeln!(
            out,
            "{label}  K={:<3} N={:<4}  {:>12.6} s  tables {:>12} bytes",
            point.num_queries, point.num_clips, point.min_seconds, point.table_bytes
        );
    }
    let _ = writeln!(
        out,
        "query ratio {:.3} (band [{}, {}]) {}",
        report.query_ratio,
        report.query_band.0,
        report.query_band.1,
        if report.query_ratio_in_band {
            "ok"
        } else {
            "OUT OF BAND"
        }
    );
    let _ = writeln!(
        out,
        "clip ratio  {:.3} (band [{}, {}]) {}",
        report.clip_ratio,
        report.clip_band.0,
        report.clip_band.1,
        if report.clip_ratio_in_band {
            "ok"
        } else {
            "OUT OF BAND"
        }
    );
    out
}
