//! Clip-grid intervals and their overlap arithmetic.
//!
//! A video is divided into `N` equal clips. A proposal is a contiguous span
//! of clips `[start, end]`, both endpoints 0-based and inclusive, so the
//! shortest proposal covers a single clip. All IoU math in this crate is
//! discrete: sizes are counted in clips, never in seconds.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// A contiguous, inclusive span of clip indices.
///
/// Invariant: `start <= end`. Both endpoints are 0-based clip indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClipInterval {
    start: usize,
    end: usize,
}

impl ClipInterval {
    /// Builds an interval, rejecting `start > end`.
    pub fn new(start: usize, end: usize) -> Result<Self, CoreError> {
        if start > end {
            return Err(CoreError::InvertedInterval { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    /// Number of clips covered, always at least 1.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    /// True when the two intervals share at least one clip.
    ///
    /// Adjacent intervals (`a.end + 1 == b.start`) do not overlap; the
    /// non-overlap constraint used by the solver permits touching spans.
    pub fn overlaps(&self, other: &ClipInterval) -> bool {
        self.start.max(other.start) <= self.end.min(other.end)
    }

    /// Discrete intersection-over-union, counted in clips.
    ///
    /// Returns a value in `[0, 1]`; 0 exactly when the intervals are
    /// disjoint and 1 exactly when they are identical.
    pub fn iou(&self, other: &ClipInterval) -> f64 {
        let inter_lo = self.start.max(other.start);
        let inter_hi = self.end.min(other.end);
        if inter_lo > inter_hi {
            return 0.0;
        }
        let inter = (inter_hi - inter_lo + 1) as f64;
        let union = (self.len() + other.len()) as f64 - inter;
        inter / union
    }

    /// True when the interval fits a grid of `num_clips` clips.
    pub fn fits(&self, num_clips: usize) -> bool {
        self.end < num_clips
    }
}

impl std::fmt::Display for ClipInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Free-function form of [`ClipInterval::iou`].
pub fn interval_iou(a: &ClipInterval, b: &ClipInterval) -> f64 {
    a.iou(b)
}

/// Free-function form of [`ClipInterval::overlaps`].
pub fn intervals_overlap(a: &ClipInterval, b: &ClipInterval) -> bool {
    a.overlaps(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn iv(s: usize, e: usize) -> ClipInterval {
        ClipInterval::new(s, e).unwrap()
    }

    /// Set-counting oracle: materialize both clip sets and count.
    fn iou_by_counting(a: &ClipInterval, b: &ClipInterval) -> f64 {
        let sa: HashSet<usize> = (a.start()..=a.end()).collect();
        let sb: HashSet<usize> = (b.start()..=b.end()).collect();
        let inter = sa.intersection(&sb).count() as f64;
        let union = sa.union(&sb).count() as f64;
        inter / union
    }

    #[test]
    fn rejects_inverted() {
        assert!(ClipInterval::new(3, 2).is_err());
        assert!(ClipInterval::new(0, 0).is_ok());
    }

    #[test]
    fn iou_identity() {
        assert_eq!(iv(3, 6).iou(&iv(3, 6)), 1.0);
    }

    #[test]
    fn iou_disjoint() {
        assert_eq!(iv(0, 1).iou(&iv(2, 5)), 0.0);
    }

    #[test]
    fn iou_partial_overlap() {
        // intersection {2,3} has size 2, union {0..5} has size 6
        let expected = iou_by_counting(&iv(0, 3), &iv(2, 5));
        assert_eq!(expected, 2.0 / 6.0);
        assert!((iv(0, 3).iou(&iv(2, 5)) - expected).abs() < 1e-15);
    }

    #[test]
    fn overlap_cases() {
        assert!(
            !iv(0, 2).overlaps(&iv(3, 5)),
            "adjacent spans do not overlap"
        );
        assert!(iv(0, 2).overlaps(&iv(2, 5)), "shared clip 2");
        assert!(iv(1, 1).overlaps(&iv(1, 1)), "identical single clip");
    }

    proptest! {
        #[test]
        fn iou_matches_counting_oracle(s1 in 0usize..12, l1 in 0usize..12,
                                       s2 in 0usize..12, l2 in 0usize..12) {
            let a = iv(s1, s1 + l1);
            let b = iv(s2, s2 + l2);
            prop_assert!((a.iou(&b) - iou_by_counting(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn iou_symmetric_and_consistent(s1 in 0usize..20, l1 in 0usize..10,
                                        s2 in 0usize..20, l2 in 0usize..10) {
            let a = iv(s1, s1 + l1);
            let b = iv(s2, s2 + l2);
            prop_assert_eq!(a.iou(&b), b.iou(&a));
            // iou == 1 exactly on identical intervals
            prop_assert_eq!(a.iou(&b) == 1.0, a == b);
            // iou > 0 exactly when the intervals overlap
            prop_assert_eq!(a.iou(&b) > 0.0, a.overlaps(&b));
            prop_assert!((0.0..=1.0).contains(&a.iou(&b)));
        }
    }
}
