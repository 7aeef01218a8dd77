//! Validation errors for the domain types.

use thiserror::Error;

/// Construction and validation failures for intervals, feature maps, and
/// score stacks.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("inverted interval: start {start} > end {end}")]
    InvertedInterval { start: usize, end: usize },

    #[error("interval [{start}, {end}] does not fit a grid of {num_clips} clips")]
    IntervalOutOfRange {
        start: usize,
        end: usize,
        num_clips: usize,
    },

    #[error("num_clips must be at least 1")]
    EmptyGrid,

    #[error("feature dimension must be at least 1")]
    EmptyDim,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at proposal ({start}, {end})")]
    NonFiniteCell { start: usize, end: usize },

    #[error("valid proposal ({start}, {end}) holds null")]
    NullOnValidCell { start: usize, end: usize },

    #[error("masked cell ({start}, {end}) holds a value; cells with start > end must be null")]
    ValueOnMaskedCell { start: usize, end: usize },

    #[error("degenerate text feature: zero-norm {kind} vector")]
    ZeroNormText { kind: &'static str },

    #[error("importance logits must have length {expected} (sentence first), got {got}")]
    LogitLength { expected: usize, got: usize },

    #[error("non-finite importance logit at position {position}")]
    NonFiniteLogit { position: usize },

    #[error("phrase {index} has dimension {got}, expected {expected}")]
    PhraseDimMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("a score stack needs at least one query map")]
    EmptyStack,

    #[error("query {index} has {got} clips, expected {expected}")]
    ClipCountMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
}
