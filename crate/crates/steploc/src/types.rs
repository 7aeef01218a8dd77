//! Domain types shared across fusion, solving, and evaluation.
//!
//! The central object is the 2D proposal grid: an `N x N` layout where cell
//! `(s, n)` stands for the candidate span of clips `s..=n`. Only the upper
//! triangle (`s <= n`) is meaningful; lower-triangle cells are masked and
//! must never feed any computation. In-memory maps keep `NaN` in masked
//! cells so an accidental read poisons the result instead of passing
//! silently. Stored files encode the mask as explicit nulls instead.
//!
//! All types here are immutable after construction and safe to share across
//! threads.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::interval::ClipInterval;

/// An `N x N` grid of per-proposal scores, masked below the diagonal.
#[derive(Debug, Clone)]
pub struct ScoreMap {
    num_clips: usize,
    /// Row-major `N x N`; `NaN` marks masked (start > end) cells.
    values: Vec<f64>,
}

// Masked cells hold NaN, so the derived float equality would make a map
// unequal to itself; compare valid cells by value and masked cells as
// trivially equal.
impl PartialEq for ScoreMap {
    fn eq(&self, other: &Self) -> bool {
        self.num_clips == other.num_clips
            && self
                .valid_cells()
                .zip(other.valid_cells())
                .all(|((_, _, a), (_, _, b))| a == b)
    }
}

impl ScoreMap {
    /// Grid with every valid cell set to `value`.
    pub fn filled(num_clips: usize, value: f64) -> Self {
        Self::from_fn(num_clips, |_, _| value)
    }

    /// Builds a grid by evaluating `f(start, end)` on every valid cell.
    pub fn from_fn(num_clips: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(num_clips > 0, "score map needs at least one clip");
        let mut values = vec![f64::NAN; num_clips * num_clips];
        for start in 0..num_clips {
            for end in start..num_clips {
                values[start * num_clips + end] = f(start, end);
            }
        }
        Self { num_clips, values }
    }

    /// Rebuilds a grid from a row-major array with `None` on masked cells.
    ///
    /// The null pattern must match the mask exactly and every valid cell
    /// must hold a finite value.
    pub fn from_row_major(num_clips: usize, cells: &[Option<f64>]) -> Result<Self, CoreError> {
        if num_clips == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if cells.len() != num_clips * num_clips {
            return Err(CoreError::LengthMismatch {
                expected: num_clips * num_clips,
                got: cells.len(),
            });
        }
        let mut values = vec![f64::NAN; num_clips * num_clips];
        for start in 0..num_clips {
            for end in 0..num_clips {
                let idx = start * num_clips + end;
                match (cells[idx], start <= end) {
                    (Some(v), true) => {
                        if !v.is_finite() {
                            return Err(CoreError::NonFiniteCell { start, end });
                        }
                        values[idx] = v;
                    }
                    (None, false) => {}
                    (None, true) => return Err(CoreError::NullOnValidCell { start, end }),
                    (Some(_), false) => return Err(CoreError::ValueOnMaskedCell { start, end }),
                }
            }
        }
        Ok(Self { num_clips, values })
    }

    /// Row-major export with `None` on masked cells, the stored-file shape.
    pub fn to_row_major(&self) -> Vec<Option<f64>> {
        let n = self.num_clips;
        let mut out = vec![None; n * n];
        for (start, end, v) in self.valid_cells() {
            out[start * n + end] = Some(v);
        }
        out
    }

    pub fn num_clips(&self) -> usize {
        self.num_clips
    }

    /// Number of valid (upper-triangle) cells: `N (N + 1) / 2`.
    pub fn num_valid(&self) -> usize {
        self.num_clips * (self.num_clips + 1) / 2
    }

    /// Score at `(start, end)`, or `None` for a masked cell.
    ///
    /// Panics when either index is outside the grid; that is a caller bug,
    /// not a masked read.
    pub fn get(&self, start: usize, end: usize) -> Option<f64> {
        assert!(
            start < self.num_clips && end < self.num_clips,
            "cell ({start}, {end}) outside a {n}-clip grid",
            n = self.num_clips
        );
        if start > end {
            None
        } else {
            Some(self.values[start * self.num_clips + end])
        }
    }

    /// Overwrites a valid cell. Panics on masked cells.
    pub fn set(&mut self, start: usize, end: usize, value: f64) {
        assert!(
            start <= end && end < self.num_clips,
            "cell ({start}, {end}) is masked or outside the grid"
        );
        self.values[start * self.num_clips + end] = value;
    }

    /// Iterates valid cells in row-major order as `(start, end, value)`.
    pub fn valid_cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.num_clips;
        (0..n).flat_map(move |s| (s..n).map(move |e| (s, e, self.values[s * n + e])))
    }

    /// New grid with `f` applied to every valid cell.
    pub fn map_valid(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        Self::from_fn(self.num_clips, |s, e| {
            f(s, e, self.values[s * self.num_clips + e])
        })
    }

    /// True when every valid cell holds a finite value.
    pub fn all_finite(&self) -> bool {
        self.valid_cells().all(|(_, _, v)| v.is_finite())
    }
}

/// The `N x N x D` proposal feature grid a video is matched against.
///
/// Masked cells are never read; their storage is zero-filled.
#[derive(Debug, Clone)]
pub struct TemporalFeatureMap {
    num_clips: usize,
    dim: usize,
    /// Row-major `N x N x D`.
    values: Vec<f64>,
}

// Only valid cells carry meaning; masked storage stays out of equality.
impl PartialEq for TemporalFeatureMap {
    fn eq(&self, other: &Self) -> bool {
        self.num_clips == other.num_clips
            && self.dim == other.dim
            && (0..self.num_clips)
                .all(|s| (s..self.num_clips).all(|e| self.cell(s, e) == other.cell(s, e)))
    }
}

impl TemporalFeatureMap {
    /// Validates shape and finiteness of every valid cell vector.
    pub fn new(num_clips: usize, dim: usize, values: Vec<f64>) -> Result<Self, CoreError> {
        if num_clips == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if dim == 0 {
            return Err(CoreError::EmptyDim);
        }
        let expected = num_clips * num_clips * dim;
        if values.len() != expected {
            return Err(CoreError::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        let map = Self {
            num_clips,
            dim,
            values,
        };
        for start in 0..num_clips {
            for end in start..num_clips {
                if map.cell(start, end).iter().any(|v| !v.is_finite()) {
                    return Err(CoreError::NonFiniteCell { start, end });
                }
            }
        }
        Ok(map)
    }

    /// Builds the grid by evaluating `f(start, end)` on every valid cell.
    pub fn from_fn(
        num_clips: usize,
        dim: usize,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Result<Self, CoreError> {
        if num_clips == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if dim == 0 {
            return Err(CoreError::EmptyDim);
        }
        let mut values = vec![0.0; num_clips * num_clips * dim];
        for start in 0..num_clips {
            for end in start..num_clips {
                let cell = f(start, end);
                if cell.len() != dim {
                    return Err(CoreError::LengthMismatch {
                        expected: dim,
                        got: cell.len(),
                    });
                }
                let base = (start * num_clips + end) * dim;
                values[base..base + dim].copy_from_slice(&cell);
            }
        }
        Self::new(num_clips, dim, values)
    }

    pub fn num_clips(&self) -> usize {
        self.num_clips
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Feature vector of the proposal `(start, end)`.
    ///
    /// Panics on masked or out-of-range cells.
    pub fn cell(&self, start: usize, end: usize) -> &[f64] {
        assert!(
            start <= end && end < self.num_clips,
            "cell ({start}, {end}) is masked or outside the grid"
        );
        let base = (start * self.num_clips + end) * self.dim;
        &self.values[base..base + self.dim]
    }
}

/// Text-side inputs for one step query: the sentence vector, its phrase
/// vectors, and the raw importance logits (sentence logit first).
#[derive(Debug, Clone, PartialEq)]
pub struct QueryFeatures {
    sentence: Vec<f64>,
    phrases: Vec<Vec<f64>>,
    importance_logits: Vec<f64>,
}

impl QueryFeatures {
    pub fn new(
        sentence: Vec<f64>,
        phrases: Vec<Vec<f64>>,
        importance_logits: Vec<f64>,
    ) -> Result<Self, CoreError> {
        if sentence.is_empty() {
            return Err(CoreError::EmptyDim);
        }
        let dim = sentence.len();
        if !has_finite_nonzero_norm(&sentence) {
            return Err(CoreError::ZeroNormText { kind: "sentence" });
        }
        for (index, phrase) in phrases.iter().enumerate() {
            if phrase.len() != dim {
                return Err(CoreError::PhraseDimMismatch {
                    index,
                    expected: dim,
                    got: phrase.len(),
                });
            }
            if !has_finite_nonzero_norm(phrase) {
                return Err(CoreError::ZeroNormText { kind: "phrase" });
            }
        }
        if importance_logits.len() != phrases.len() + 1 {
            return Err(CoreError::LogitLength {
                expected: phrases.len() + 1,
                got: importance_logits.len(),
            });
        }
        if let Some(position) = importance_logits.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteLogit { position });
        }
        Ok(Self {
            sentence,
            phrases,
            importance_logits,
        })
    }

    pub fn sentence(&self) -> &[f64] {
        &self.sentence
    }

    pub fn phrases(&self) -> &[Vec<f64>] {
        &self.phrases
    }

    pub fn num_phrases(&self) -> usize {
        self.phrases.len()
    }

    pub fn importance_logits(&self) -> &[f64] {
        &self.importance_logits
    }
}

fn has_finite_nonzero_norm(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite()) && v.iter().any(|x| *x != 0.0)
}

/// All score maps of one video, one per step query, sharing a clip grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreStack {
    video_id: String,
    maps: Vec<ScoreMap>,
}

impl ScoreStack {
    pub fn new(video_id: impl Into<String>, maps: Vec<ScoreMap>) -> Result<Self, CoreError> {
        if maps.is_empty() {
            return Err(CoreError::EmptyStack);
        }
        let num_clips = maps[0].num_clips();
        for (index, map) in maps.iter().enumerate() {
            if map.num_clips() != num_clips {
                return Err(CoreError::ClipCountMismatch {
                    index,
                    expected: num_clips,
                    got: map.num_clips(),
                });
            }
        }
        Ok(Self {
            video_id: video_id.into(),
            maps,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn num_queries(&self) -> usize {
        self.maps.len()
    }

    pub fn num_clips(&self) -> usize {
        self.maps[0].num_clips()
    }

    pub fn maps(&self) -> &[ScoreMap] {
        &self.maps
    }

    pub fn map(&self, query: usize) -> &ScoreMap {
        &self.maps[query]
    }
}

/// Which selection routine produced an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectMethod {
    Dp,
    Greedy,
    BruteForce,
}

impl std::fmt::Display for SelectMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SelectMethod::Dp => "dp",
            SelectMethod::Greedy => "greedy",
            SelectMethod::BruteForce => "brute-force",
        };
        f.write_str(s)
    }
}

/// One interval chosen for one query, with its log-probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentEntry {
    pub query_index: usize,
    pub interval: ClipInterval,
    pub log_prob: f64,
}

/// The solver's answer for one video: exactly one interval per query.
///
/// When `method` is exact (`Dp` or `BruteForce`) and `fallback_used` is
/// false the intervals are pairwise non-overlapping. `objective` is the sum
/// of the entry log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub video_id: String,
    /// Sorted by `query_index`, one entry per query.
    pub entries: Vec<AssignmentEntry>,
    pub objective: f64,
    pub method: SelectMethod,
    pub fallback_used: bool,
}

impl Assignment {
    /// True when no two chosen intervals share a clip.
    pub fn is_disjoint(&self) -> bool {
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                if a.interval.overlaps(&b.interval) {
                    return false;
                }
            }
        }
        true
    }

    /// Indices of entries whose interval overlaps at least one other entry.
    pub fn overlapping_entries(&self) -> Vec<usize> {
        let n = self.entries.len();
        let mut hit = vec![false; n];
        for i in 0..n {
            for j in i + 1..n {
                if self.entries[i].interval.overlaps(&self.entries[j].interval) {
                    hit[i] = true;
                    hit[j] = true;
                }
            }
        }
        (0..n).filter(|&i| hit[i]).collect()
    }
}
