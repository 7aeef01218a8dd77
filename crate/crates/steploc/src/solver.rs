//! Non-overlapping proposal assignment across all step queries of a video.
//!
//! Given per-query log-probability maps, [`dp_select`] maximizes the joint
//! log-probability of one proposal per query subject to pairwise
//! non-overlap. The state is a subset DP: for every subset of queries and
//! every clip column it tracks the best score achievable when all chosen
//! proposals end at or before that column. Complexity is
//! `O(2^K · N² · K)`, which is why instances with more than
//! `max_exact_queries` queries (or `K > N`, where non-overlap is
//! infeasible) fall back to the independent per-query argmax of
//! [`greedy_select`].
//!
//! [`brute_force_select`] enumerates every disjoint assignment outright and
//! exists purely as a correctness oracle for small instances.

use rayon::prelude::*;
use thiserror::Error;

use crate::error::CoreError;
use crate::interval::ClipInterval;
use crate::prob::{log_sigmoid, to_probabilities, ProbError, ProbMap};
use crate::types::{Assignment, AssignmentEntry, ScoreMap, ScoreStack, SelectMethod};

/// Queries above this count trigger the greedy fallback by default; the
/// exact solver's table would double in size with each extra query.
pub const DEFAULT_MAX_EXACT_QUERIES: usize = 17;

/// Hard ceiling for [`brute_force_select`].
pub const BRUTE_FORCE_MAX_QUERIES: usize = 6;
pub const BRUTE_FORCE_MAX_CLIPS: usize = 12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Prob(#[from] ProbError),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("unassignable query {query}: no proposal has a finite log-probability")]
    UnassignableQuery { query: usize },

    #[error("NaN log-probability for query {query} at proposal ({start}, {end})")]
    NanLogProb {
        query: usize,
        start: usize,
        end: usize,
    },

    #[error("masked cell ({start}, {end}) of query {query} must be -inf")]
    MaskedCellNotNegInf {
        query: usize,
        start: usize,
        end: usize,
    },

    #[error(
        "brute force is limited to K <= {BRUTE_FORCE_MAX_QUERIES}, N <= {BRUTE_FORCE_MAX_CLIPS}; \
         got K={num_queries}, N={num_clips}"
    )]
    SizeGuard {
        num_queries: usize,
        num_clips: usize,
    },

    #[error(
        "no pairwise non-overlapping assignment exists for {num_queries} queries in {num_clips} clips"
    )]
    Infeasible {
        num_queries: usize,
        num_clips: usize,
    },
}

/// Per-query log-probabilities over the proposal grid: `K × N × N`, laid
/// out `[query][start][end]`, with `-inf` on masked cells. A `-inf` on a
/// valid cell means the proposal is forbidden for that query.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProbStack {
    video_id: String,
    num_queries: usize,
    num_clips: usize,
    values: Vec<f64>,
}

impl LogProbStack {
    pub fn new(
        video_id: impl Into<String>,
        num_queries: usize,
        num_clips: usize,
        values: Vec<f64>,
    ) -> Result<Self, SolverError> {
        if num_queries == 0 {
            return Err(CoreError::EmptyStack.into());
        }
        if num_clips == 0 {
            return Err(CoreError::EmptyGrid.into());
        }
        let expected = num_queries * num_clips * num_clips;
        if values.len() != expected {
            return Err(CoreError::LengthMismatch {
                expected,
                got: values.len(),
            }
            .into());
        }
        let stack = Self {
            video_id: video_id.into(),
            num_queries,
            num_clips,
            values,
        };
        for query in 0..num_queries {
            for start in 0..num_clips {
                for end in 0..num_clips {
                    let v = stack.get(query, start, end);
                    if v.is_nan() {
                        return Err(SolverError::NanLogProb { query, start, end });
                    }
                    if start > end && v != f64::NEG_INFINITY {
                        return Err(SolverError::MaskedCellNotNegInf { query, start, end });
                    }
                }
            }
        }
        Ok(stack)
    }

    /// Builds a stack from per-query maps; masked cells become `-inf`.
    pub fn from_maps(video_id: impl Into<String>, maps: &[ScoreMap]) -> Result<Self, SolverError> {
        if maps.is_empty() {
            return Err(CoreError::EmptyStack.into());
        }
        let num_clips = maps[0].num_clips();
        let num_queries = maps.len();
        let mut values = vec![f64::NEG_INFINITY; num_queries * num_clips * num_clips];
        for (query, map) in maps.iter().enumerate() {
            if map.num_clips() != num_clips {
                return Err(CoreError::ClipCountMismatch {
                    index: query,
                    expected: num_clips,
                    got: map.num_clips(),
                }
                .into());
            }
            for (start, end, v) in map.valid_cells() {
                if v.is_nan() {
                    return Err(SolverError::NanLogProb { query, start, end });
                }
                values[(query * num_clips + start) * num_clips + end] = v;
            }
        }
        Ok(Self {
            video_id: video_id.into(),
            num_queries,
            num_clips,
            values,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn num_queries(&self) -> usize {
        self.num_queries
    }

    pub fn num_clips(&self) -> usize {
        self.num_clips
    }

    #[inline]
    pub fn get(&self, query: usize, start: usize, end: usize) -> f64 {
        debug_assert!(query < self.num_queries && start < self.num_clips && end < self.num_clips);
        self.values[(query * self.num_clips + start) * self.num_clips + end]
    }

    /// First query whose map has no finite cell, if any.
    fn first_unassignable(&self) -> Option<usize> {
        (0..self.num_queries).find(|&query| {
            let base = query * self.num_clips * self.num_clips;
            !self.values[base..base + self.num_clips * self.num_clips]
                .iter()
                .any(|v| v.is_finite())
        })
    }
}

/// Converts a score stack to log-probabilities.
///
/// `Clamp` and `MinMax` first map scores into `[ε, 1]` and take the log;
/// `Sigmoid` computes `ln σ(score)` directly in a form that stays finite
/// for any finite score, so `ε` is not involved (it is validated anyway to
/// keep the call contract uniform).
pub fn score_to_logprob(
    stack: &ScoreStack,
    mode: ProbMap,
    epsilon: f64,
) -> Result<LogProbStack, SolverError> {
    crate::prob::validate_epsilon(epsilon)?;
    let mut log_maps = Vec::with_capacity(stack.num_queries());
    for map in stack.maps() {
        let log_map = match mode {
            ProbMap::Sigmoid => map.map_valid(|_, _, v| log_sigmoid(v)),
            ProbMap::Clamp | ProbMap::MinMax => {
                to_probabilities(map, mode, epsilon)?.map_valid(|_, _, p| p.ln())
            }
        };
        log_maps.push(log_map);
    }
    LogProbStack::from_maps(stack.video_id(), &log_maps)
}

/// Bytes of DP table state for a `K`-query, `N`-clip instance; lets
/// callers budget memory before committing to the exact solver.
pub fn dp_table_bytes(num_queries: usize, num_clips: usize) -> u64 {
    if num_queries >= 64 {
        return u64::MAX;
    }
    let masks = 1u128 << num_queries;
    let cols = num_clips as u128 + 1;
    let prefix = masks * cols * (8 + 4); // best (f64) + argmax position (u32)
    let choice = masks * num_clips as u128 * 8;
    let scores = (num_queries * num_clips * num_clips) as u128 * 8;
    let scratch = masks * 16;
    (prefix + choice + scores + scratch).min(u64::MAX as u128) as u64
}

/// Exact maximization of the joint log-probability over pairwise
/// non-overlapping assignments, with a greedy fallback.
///
/// Falls back to [`greedy_select`] (with `fallback_used = true`) when
/// `K > max_exact_queries`, when `K > N` (non-overlap is impossible), or
/// when forbidden cells leave no feasible disjoint assignment.
pub fn dp_select(logp: &LogProbStack, max_exact_queries: usize) -> Result<Assignment, SolverError> {
    if let Some(query) = logp.first_unassignable() {
        return Err(SolverError::UnassignableQuery { query });
    }
    let k = logp.num_queries();
    let n = logp.num_clips();
    if k > max_exact_queries || k > n || k >= 64 {
        let mut fallback = greedy_select(logp)?;
        fallback.fallback_used = true;
        return Ok(fallback);
    }
    match dp_exact(logp) {
        Some(assignment) => Ok(assignment),
        None => {
            // Forbidden cells made every disjoint assignment -inf.
            let mut fallback = greedy_select(logp)?;
            fallback.fallback_used = true;
            Ok(fallback)
        }
    }
}

const NO_CHOICE: u64 = u64::MAX;

#[inline]
fn pack_choice(query: usize, start: usize) -> u64 {
    ((query as u64) << 32) | start as u64
}

#[inline]
fn unpack_choice(packed: u64) -> (usize, usize) {
    ((packed >> 32) as usize, (packed & 0xffff_ffff) as usize)
}

/// Core table fill + backtrack. Returns `None` when the optimum is `-inf`
/// (no feasible disjoint assignment).
fn dp_exact(logp: &LogProbStack) -> Option<Assignment> {
    let k = logp.num_queries();
    let n = logp.num_clips();
    let masks = 1usize << k;
    let full = masks - 1;
    let cols = n + 1;

    // Scores transposed to [query][end][start] so the inner start-scan is
    // contiguous.
    let mut scores = vec![f64::NEG_INFINITY; k * n * n];
    for query in 0..k {
        for start in 0..n {
            for end in start..n {
                scores[(query * n + end) * n + start] = logp.get(query, start, end);
            }
        }
    }

    // prefix_best[mask][c] = best score assigning the queries in `mask` to
    // disjoint proposals that all end strictly before clip `c`;
    // prefix_pos[mask][c] = the end clip of the latest proposal in that
    // best solution. The empty set scores 0 everywhere (empty assignment);
    // every other mask starts -inf.
    let mut prefix_best = vec![f64::NEG_INFINITY; masks * cols];
    let mut prefix_pos = vec![u32::MAX; masks * cols];
    prefix_best[..cols].fill(0.0);

    // choice[end][mask] = packed (query, start) maximizing the score when
    // the latest proposal of `mask` ends exactly at `end`.
    let mut choice = vec![NO_CHOICE; n * masks];

    let mut column_best = vec![f64::NEG_INFINITY; masks];
    let mut column_choice = vec![NO_CHOICE; masks];

    for end in 0..n {
        // Compute phase: best score per subset with the latest proposal
        // ending exactly at `end`. Reads only prefix columns <= end, so
        // subsets are independent and the partitioning cannot affect the
        // result. Ties prefer the smaller query index, then the smaller
        // start (strict > with ascending scans).
        column_best
            .par_iter_mut()
            .zip(column_choice.par_iter_mut())
            .enumerate()
            .with_min_len(512)
            .for_each(|(mask, (best_out, choice_out))| {
                *best_out = f64::NEG_INFINITY;
                *choice_out = NO_CHOICE;
                if mask == 0 || mask.count_ones() as usize > end + 1 {
                    return;
                }
                let mut best = f64::NEG_INFINITY;
                let mut best_packed = NO_CHOICE;
                let mut bits = mask;
                while bits != 0 {
                    let query = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let rest = mask & !(1usize << query);
                    let prefix = &prefix_best[rest * cols..rest * cols + end + 1];
                    let row = &scores[(query * n + end) * n..(query * n + end) * n + end + 1];
                    for (start, (&g, &s)) in prefix.iter().zip(row).enumerate() {
                        let cand = g + s;
                        if cand > best {
                            best = cand;
                            best_packed = pack_choice(query, start);
                        }
                    }
                }
                *best_out = best;
                *choice_out = best_packed;
            });

        // Update phase: fold this column into the prefix tables. Strict >
        // keeps the earlier end on ties.
        choice[end * masks..(end + 1) * masks].copy_from_slice(&column_choice);
        prefix_best
            .par_chunks_mut(cols)
            .zip(prefix_pos.par_chunks_mut(cols))
            .zip(column_best.par_iter())
            .with_min_len(512)
            .for_each(|((best_row, pos_row), &f)| {
                if f > best_row[end] {
                    best_row[end + 1] = f;
                    pos_row[end + 1] = end as u32;
                } else {
                    best_row[end + 1] = best_row[end];
                    pos_row[end + 1] = pos_row[end];
                }
            });
    }

    let objective = prefix_best[full * cols + n];
    if !objective.is_finite() {
        return None;
    }

    let mut entries = Vec::with_capacity(k);
    let mut mask = full;
    let mut col = n;
    while mask != 0 {
        let end = prefix_pos[mask * cols + col] as usize;
        let packed = choice[end * masks + mask];
        debug_assert_ne!(packed, NO_CHOICE);
        let (query, start) = unpack_choice(packed);
        entries.push(AssignmentEntry {
            query_index: query,
            interval: ClipInterval::new(start, end).expect("backtracked interval is ordered"),
            log_prob: logp.get(query, start, end),
        });
        mask &= !(1usize << query);
        col = start;
    }
    entries.sort_by_key(|e| e.query_index);

    let assignment = Assignment {
        video_id: logp.video_id().to_string(),
        entries,
        objective,
        method: SelectMethod::Dp,
        fallback_used: false,
    };
    debug_assert!(assignment.is_disjoint());
    Some(assignment)
}

/// Independent per-query argmax; overlaps permitted. Ties prefer the
/// smaller start, then the smaller end.
pub fn greedy_select(logp: &LogProbStack) -> Result<Assignment, SolverError> {
    let n = logp.num_clips();
    let mut entries = Vec::with_capacity(logp.num_queries());
    let mut objective = 0.0;
    for query in 0..logp.num_queries() {
        let mut best = f64::NEG_INFINITY;
        let mut arg = None;
        for start in 0..n {
            for end in start..n {
                let v = logp.get(query, start, end);
                if v > best {
                    best = v;
                    arg = Some((start, end));
                }
            }
        }
        let (start, end) = arg
            .filter(|_| best.is_finite())
            .ok_or(SolverError::UnassignableQuery { query })?;
        objective += best;
        entries.push(AssignmentEntry {
            query_index: query,
            interval: ClipInterval::new(start, end).expect("scan emits ordered intervals"),
            log_prob: best,
        });
    }
    Ok(Assignment {
        video_id: logp.video_id().to_string(),
        entries,
        objective,
        method: SelectMethod::Greedy,
        fallback_used: false,
    })
}

/// Exhaustive oracle over all disjoint assignments. Tie-breaking matches
/// `dp_select` exactly, so on any in-guard instance the two agree on both
/// objective and chosen intervals.
pub fn brute_force_select(logp: &LogProbStack) -> Result<Assignment, SolverError> {
    let k = logp.num_queries();
    let n = logp.num_clips();
    if k > BRUTE_FORCE_MAX_QUERIES || n > BRUTE_FORCE_MAX_CLIPS {
        return Err(SolverError::SizeGuard {
            num_queries: k,
            num_clips: n,
        });
    }

    struct Search<'a> {
        logp: &'a LogProbStack,
        num_clips: usize,
        current: Vec<(usize, usize)>, // (start, end) per query index
        best: Option<(f64, Vec<(usize, usize)>)>,
    }

    impl Search<'_> {
        fn run(&mut self, query: usize, occupied: u32) {
            if query == self.logp.num_queries() {
                self.consider();
                return;
            }
            for start in 0..self.num_clips {
                for end in start..self.num_clips {
                    let cells = clip_mask(start, end);
                    if occupied & cells != 0 {
                        continue;
                    }
                    if !self.logp.get(query, start, end).is_finite() {
                        continue;
                    }
                    self.current.push((start, end));
                    self.run(query + 1, occupied | cells);
                    self.current.pop();
                }
            }
        }

        fn consider(&mut self) {
            // Sum in ascending-end order — the same association order the
            // DP uses — so equal assignments produce bit-equal objectives
            // and ties are exact.
            let mut by_end: Vec<(usize, usize, usize)> = self
                .current
                .iter()
                .enumerate()
                .map(|(q, &(s, e))| (e, q, s))
                .collect();
            by_end.sort_unstable();
            let objective = by_end
                .iter()
                .fold(0.0, |acc, &(e, q, s)| acc + self.logp.get(q, s, e));
            let better = match &self.best {
                None => true,
                Some((best_obj, best_intervals)) => {
                    objective > *best_obj
                        || (objective == *best_obj
                            && descending_key(&self.current) < descending_key(best_intervals))
                }
            };
            if better {
                self.best = Some((objective, self.current.clone()));
            }
        }
    }

    // The DP discovers entries latest-end first, minimizing (end, query,
    // start) lexicographically at each step; this key mirrors that order.
    fn descending_key(intervals: &[(usize, usize)]) -> Vec<(usize, usize, usize)> {
        let mut key: Vec<(usize, usize, usize)> = intervals
            .iter()
            .enumerate()
            .map(|(q, &(s, e))| (e, q, s))
            .collect();
        key.sort_unstable();
        key.reverse();
        key
    }

    fn clip_mask(start: usize, end: usize) -> u32 {
        debug_assert!(end < 32);
        let span = end - start + 1;
        (((1u64 << span) - 1) << start) as u32
    }

    let mut search = Search {
        logp,
        num_clips: n,
        current: Vec::with_capacity(k),
        best: None,
    };
    search.run(0, 0);

    let (objective, intervals) = search.best.ok_or(SolverError::Infeasible {
        num_queries: k,
        num_clips: n,
    })?;
    let entries = intervals
        .iter()
        .enumerate()
        .map(|(query, &(start, end))| AssignmentEntry {
            query_index: query,
            interval: ClipInterval::new(start, end).expect("enumeration emits ordered intervals"),
            log_prob: logp.get(query, start, end),
        })
        .collect();
    Ok(Assignment {
        video_id: logp.video_id().to_string(),
        entries,
        objective,
        method: SelectMethod::BruteForce,
        fallback_used: false,
    })
}
