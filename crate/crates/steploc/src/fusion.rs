//! Sentence/phrase score-map construction and importance-weighted fusion.
//!
//! A query is matched against the proposal grid in three steps: cosine
//! similarity of each text vector against every valid cell
//! ([`cosine_score_map`]), a softmax over the raw importance logits
//! ([`softmax_importance`]), and a weighted sum of the per-text maps
//! ([`fuse_score_maps`]). The fused map is a plain weighted sum — it is not
//! re-normalized afterwards — so fused values stay inside the convex hull
//! of the component maps.

use thiserror::Error;

use crate::types::{QueryFeatures, ScoreMap, TemporalFeatureMap};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("degenerate text feature: zero-norm vector")]
    DegenerateText,

    #[error("degenerate proposal feature: zero-norm cell ({start}, {end})")]
    DegenerateProposal { start: usize, end: usize },

    #[error("text vector has dimension {got}, feature map expects {expected}")]
    DimMismatch { expected: usize, got: usize },

    #[error("importance logits must not be empty")]
    EmptyLogits,

    #[error("non-finite importance logit at position {position}")]
    NonFiniteLogit { position: usize },

    #[error("{count} phrase maps but {weights} phrase weights")]
    PhraseCountMismatch { count: usize, weights: usize },

    #[error("phrase map {index} has {got} clips, sentence map has {expected}")]
    GridMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },

    #[error("invalid importance weights: {reason}")]
    InvalidWeights { reason: &'static str },

    #[error("ensemble needs at least one score map")]
    EmptyEnsemble,

    #[error("ensemble map {index} has {got} clips, first map has {expected}")]
    EnsembleGridMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
}

/// Convex fusion coefficients: the sentence weight plus one weight per
/// phrase, all nonnegative and summing to 1 (within 1e-6).
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceWeights {
    sentence_weight: f64,
    phrase_weights: Vec<f64>,
}

impl ImportanceWeights {
    pub fn new(sentence_weight: f64, phrase_weights: Vec<f64>) -> Result<Self, FusionError> {
        let all = std::iter::once(sentence_weight).chain(phrase_weights.iter().copied());
        let mut sum = 0.0;
        for w in all {
            if !w.is_finite() {
                return Err(FusionError::InvalidWeights {
                    reason: "non-finite weight",
                });
            }
            if w < 0.0 {
                return Err(FusionError::InvalidWeights {
                    reason: "negative weight",
                });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(FusionError::InvalidWeights {
                reason: "weights must sum to 1",
            });
        }
        Ok(Self {
            sentence_weight,
            phrase_weights,
        })
    }

    pub fn sentence_weight(&self) -> f64 {
        self.sentence_weight
    }

    pub fn phrase_weights(&self) -> &[f64] {
        &self.phrase_weights
    }

    pub fn num_phrases(&self) -> usize {
        self.phrase_weights.len()
    }
}

/// Cosine similarity of `text` against every valid proposal cell.
///
/// Values land in `[-1, 1]` (clamped against float drift) and are invariant
/// to positive rescaling of `text`.
pub fn cosine_score_map(
    features: &TemporalFeatureMap,
    text: &[f64],
) -> Result<ScoreMap, FusionError> {
    if text.len() != features.dim() {
        return Err(FusionError::DimMismatch {
            expected: features.dim(),
            got: text.len(),
        });
    }
    let text_norm = l2_norm(text);
    if !text_norm.is_finite() || text_norm == 0.0 {
        return Err(FusionError::DegenerateText);
    }
    let n = features.num_clips();
    let mut map = ScoreMap::filled(n, 0.0);
    for start in 0..n {
        for end in start..n {
            let cell = features.cell(start, end);
            let cell_norm = l2_norm(cell);
            if cell_norm == 0.0 {
                return Err(FusionError::DegenerateProposal { start, end });
            }
            let dot: f64 = cell.iter().zip(text).map(|(a, b)| a * b).sum();
            map.set(start, end, (dot / (cell_norm * text_norm)).clamp(-1.0, 1.0));
        }
    }
    Ok(map)
}

/// Max-subtracted softmax over the raw logits; position 0 is the sentence.
pub fn softmax_importance(logits: &[f64]) -> Result<ImportanceWeights, FusionError> {
    if logits.is_empty() {
        return Err(FusionError::EmptyLogits);
    }
    if let Some(position) = logits.iter().position(|v| !v.is_finite()) {
        return Err(FusionError::NonFiniteLogit { position });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    let mut weights = exps.into_iter().map(|e| e / denom);
    let sentence_weight = weights.next().unwrap();
    ImportanceWeights::new(sentence_weight, weights.collect())
}

/// Weighted sum of the sentence map and the phrase maps, cell-wise.
pub fn fuse_score_maps(
    sentence_map: &ScoreMap,
    phrase_maps: &[&ScoreMap],
    weights: &ImportanceWeights,
) -> Result<ScoreMap, FusionError> {
    if phrase_maps.len() != weights.num_phrases() {
        return Err(FusionError::PhraseCountMismatch {
            count: phrase_maps.len(),
            weights: weights.num_phrases(),
        });
    }
    let n = sentence_map.num_clips();
    for (index, map) in phrase_maps.iter().enumerate() {
        if map.num_clips() != n {
            return Err(FusionError::GridMismatch {
                index,
                expected: n,
                got: map.num_clips(),
            });
        }
    }
    Ok(sentence_map.map_valid(|start, end, sentence_score| {
        let mut fused = weights.sentence_weight() * sentence_score;
        for (map, w) in phrase_maps.iter().zip(weights.phrase_weights()) {
            fused += w * map.get(start, end).unwrap();
        }
        fused
    }))
}

/// Full per-query pipeline: cosine maps for sentence and phrases, softmax
/// of the logits, weighted fusion.
pub fn build_query_score_map(
    features: &TemporalFeatureMap,
    query: &QueryFeatures,
) -> Result<ScoreMap, FusionError> {
    let sentence_map = cosine_score_map(features, query.sentence())?;
    let phrase_maps: Vec<ScoreMap> = query
        .phrases()
        .iter()
        .map(|phrase| cosine_score_map(features, phrase))
        .collect::<Result<_, _>>()?;
    let weights = softmax_importance(query.importance_logits())?;
    let refs: Vec<&ScoreMap> = phrase_maps.iter().collect();
    fuse_score_maps(&sentence_map, &refs, &weights)
}

/// Element-wise mean of aligned score maps (ensemble of model variants).
pub fn mean_score_maps(maps: &[&ScoreMap]) -> Result<ScoreMap, FusionError> {
    let first = maps.first().ok_or(FusionError::EmptyEnsemble)?;
    let n = first.num_clips();
    for (index, map) in maps.iter().enumerate() {
        if map.num_clips() != n {
            return Err(FusionError::EnsembleGridMismatch {
                index,
                expected: n,
                got: map.num_clips(),
            });
        }
    }
    let count = maps.len() as f64;
    Ok(ScoreMap::from_fn(n, |start, end| {
        maps.iter().map(|m| m.get(start, end).unwrap()).sum::<f64>() / count
    }))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TemporalFeatureMap;
    use proptest::prelude::*;

    fn constant_features(n: usize, cell: &[f64]) -> TemporalFeatureMap {
        TemporalFeatureMap::from_fn(n, cell.len(), |_, _| cell.to_vec()).unwrap()
    }

    #[test]
    fn cosine_colinear_orthogonal_diagonal() {
        let text = [1.0, 0.0, 0.0];

        let m = cosine_score_map(&constant_features(2, &[2.0, 0.0, 0.0]), &text).unwrap();
        assert_eq!(m.get(0, 1), Some(1.0));

        let m = cosine_score_map(&constant_features(2, &[0.0, 3.0, 0.0]), &text).unwrap();
        assert_eq!(m.get(0, 1), Some(0.0));

        let m = cosine_score_map(&constant_features(2, &[1.0, 1.0]), &[1.0, 0.0]).unwrap();
        let expected = 1.0 / 2f64.sqrt();
        assert!((m.get(0, 0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cosine_rejects_degenerate_vectors() {
        let feats = constant_features(2, &[1.0, 0.0]);
        let err = cosine_score_map(&feats, &[0.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("degenerate text feature"));

        // Zero out exactly one cell via from_fn.
        let feats = TemporalFeatureMap::from_fn(2, 2, |s, e| {
            if (s, e) == (1, 1) {
                vec![0.0, 0.0]
            } else {
                vec![1.0, 0.0]
            }
        })
        .unwrap();
        let err = cosine_score_map(&feats, &[1.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("degenerate proposal feature"));
        assert!(err.to_string().contains("(1, 1)"));
    }

    #[test]
    fn cosine_rejects_dim_mismatch() {
        let feats = constant_features(2, &[1.0, 0.0]);
        assert!(matches!(
            cosine_score_map(&feats, &[1.0]),
            Err(FusionError::DimMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn softmax_frozen_values() {
        let w = softmax_importance(&[0.0, 0.0, 0.0]).unwrap();
        assert!((w.sentence_weight() - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.phrase_weights()[0] - 1.0 / 3.0).abs() < 1e-12);

        let w = softmax_importance(&[7.25]).unwrap();
        assert_eq!(w.sentence_weight(), 1.0);
        assert!(w.phrase_weights().is_empty());

        let w = softmax_importance(&[2f64.ln(), 0.0, 0.0]).unwrap();
        assert!((w.sentence_weight() - 0.5).abs() < 1e-12);
        assert!((w.phrase_weights()[0] - 0.25).abs() < 1e-12);
        assert!((w.phrase_weights()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn softmax_rejects_non_finite() {
        assert!(softmax_importance(&[]).is_err());
        assert!(matches!(
            softmax_importance(&[0.0, f64::NAN]),
            Err(FusionError::NonFiniteLogit { position: 1 })
        ));
    }

    #[test]
    fn weights_validation() {
        assert!(ImportanceWeights::new(0.5, vec![0.25, 0.25]).is_ok());
        assert!(ImportanceWeights::new(0.5, vec![0.25]).is_err()); // sums to 0.75
        assert!(ImportanceWeights::new(1.5, vec![-0.5]).is_err()); // negative
        assert!(ImportanceWeights::new(f64::NAN, vec![]).is_err());
    }

    #[test]
    fn fusion_identity_and_constants() {
        let m = ScoreMap::from_fn(3, |s, e| (s + e) as f64 * 0.1);
        let id = ImportanceWeights::new(1.0, vec![]).unwrap();
        assert_eq!(fuse_score_maps(&m, &[], &id).unwrap(), m);

        let sentence = ScoreMap::filled(3, 0.4);
        let p1 = ScoreMap::filled(3, 0.8);
        let p2 = ScoreMap::filled(3, 0.0);
        let w = ImportanceWeights::new(0.5, vec![0.25, 0.25]).unwrap();
        let fused = fuse_score_maps(&sentence, &[&p1, &p2], &w).unwrap();
        for (_, _, v) in fused.valid_cells() {
            assert!((v - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn fusion_of_equal_maps_is_identity() {
        let m = ScoreMap::from_fn(3, |s, e| (s * 3 + e) as f64 * 0.07 - 0.5);
        let w = ImportanceWeights::new(0.5, vec![0.25, 0.25]).unwrap();
        let fused = fuse_score_maps(&m, &[&m, &m], &w).unwrap();
        for (s, e, v) in fused.valid_cells() {
            assert!((v - m.get(s, e).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn fusion_shape_errors() {
        let m3 = ScoreMap::filled(3, 0.0);
        let m4 = ScoreMap::filled(4, 0.0);
        let w = ImportanceWeights::new(0.5, vec![0.5]).unwrap();
        assert!(matches!(
            fuse_score_maps(&m3, &[], &w),
            Err(FusionError::PhraseCountMismatch { .. })
        ));
        assert!(matches!(
            fuse_score_maps(&m3, &[&m4], &w),
            Err(FusionError::GridMismatch { .. })
        ));
    }

    #[test]
    fn build_matches_manual_composition() {
        // Fixed small instance: N=4, D=3, two phrases.
        let feats = TemporalFeatureMap::from_fn(4, 3, |s, e| {
            vec![
                1.0 + s as f64 * 0.3,
                (e as f64 - 1.2).sin(),
                0.5 + (s * e) as f64 * 0.11,
            ]
        })
        .unwrap();
        let query = QueryFeatures::new(
            vec![0.2, -0.4, 0.9],
            vec![vec![1.0, 0.0, 0.3], vec![-0.5, 0.5, 0.1]],
            vec![0.7, -0.2, 1.1],
        )
        .unwrap();

        let built = build_query_score_map(&feats, &query).unwrap();

        let s = cosine_score_map(&feats, query.sentence()).unwrap();
        let p0 = cosine_score_map(&feats, &query.phrases()[0]).unwrap();
        let p1 = cosine_score_map(&feats, &query.phrases()[1]).unwrap();
        let w = softmax_importance(query.importance_logits()).unwrap();
        let manual = fuse_score_maps(&s, &[&p0, &p1], &w).unwrap();
        assert_eq!(built, manual);
    }

    #[test]
    fn build_with_no_phrases_is_sentence_cosine() {
        let feats = constant_features(3, &[0.3, 0.7]);
        let query = QueryFeatures::new(vec![1.0, 2.0], vec![], vec![-3.0]).unwrap();
        let built = build_query_score_map(&feats, &query).unwrap();
        let sentence = cosine_score_map(&feats, query.sentence()).unwrap();
        assert_eq!(built, sentence);
    }

    #[test]
    fn build_with_identical_vectors_ignores_logits() {
        let feats =
            TemporalFeatureMap::from_fn(3, 2, |s, e| vec![1.0 + s as f64, 0.4 * e as f64]).unwrap();
        let v = vec![0.6, -0.8];
        let query = QueryFeatures::new(v.clone(), vec![v.clone(), v.clone()], vec![5.0, -2.0, 0.3])
            .unwrap();
        let built = build_query_score_map(&feats, &query).unwrap();
        let single = cosine_score_map(&feats, &v).unwrap();
        for (s, e, got) in built.valid_cells() {
            assert!((got - single.get(s, e).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn ensemble_mean() {
        let a = ScoreMap::filled(2, 0.2);
        let b = ScoreMap::filled(2, 0.8);
        let mean = mean_score_maps(&[&a, &b]).unwrap();
        for (_, _, v) in mean.valid_cells() {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!(mean_score_maps(&[]).is_err());
        let c = ScoreMap::filled(3, 0.0);
        assert!(mean_score_maps(&[&a, &c]).is_err());
    }

    fn map_strategy(n: usize) -> impl Strategy<Value = ScoreMap> {
        prop::collection::vec(-1.0f64..1.0, n * (n + 1) / 2).prop_map(move |vals| {
            let mut it = vals.into_iter();
            ScoreMap::from_fn(n, |_, _| it.next().unwrap())
        })
    }

    fn text_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, dim).prop_filter("nonzero norm", |v| l2_norm(v) > 1e-3)
    }

    proptest! {
        #[test]
        fn fused_values_stay_in_convex_hull(
            sentence in map_strategy(4),
            p0 in map_strategy(4),
            p1 in map_strategy(4),
            logits in prop::collection::vec(-4.0f64..4.0, 3),
        ) {
            let w = softmax_importance(&logits).unwrap();
            let fused = fuse_score_maps(&sentence, &[&p0, &p1], &w).unwrap();
            for (s, e, v) in fused.valid_cells() {
                let comps = [
                    sentence.get(s, e).unwrap(),
                    p0.get(s, e).unwrap(),
                    p1.get(s, e).unwrap(),
                ];
                let lo = comps.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = comps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }

        #[test]
        fn cosine_invariant_to_text_scale(
            cells in prop::collection::vec(text_strategy(3), 3),
            text in text_strategy(3),
            scale in 0.01f64..100.0,
        ) {
            let feats = TemporalFeatureMap::from_fn(2, 3, |s, e| {
                cells[s + e].clone() // (0,0) (0,1) (1,1) -> indices 0 1 2
            }).unwrap();
            let scaled: Vec<f64> = text.iter().map(|v| v * scale).collect();
            let base = cosine_score_map(&feats, &text).unwrap();
            let rescaled = cosine_score_map(&feats, &scaled).unwrap();
            for (s, e, v) in base.valid_cells() {
                prop_assert!((v - rescaled.get(s, e).unwrap()).abs() < 1e-6);
                prop_assert!((-1.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn softmax_invariant_to_logit_shift(
            logits in prop::collection::vec(-6.0f64..6.0, 1..6),
            shift in -20.0f64..20.0,
        ) {
            let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
            let a = softmax_importance(&logits).unwrap();
            let b = softmax_importance(&shifted).unwrap();
            prop_assert!((a.sentence_weight() - b.sentence_weight()).abs() < 1e-9);
            for (x, y) in a.phrase_weights().iter().zip(b.phrase_weights()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            let total: f64 = a.sentence_weight() + a.phrase_weights().iter().sum::<f64>();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn fusion_is_linear_in_the_sentence_map(
            m1 in map_strategy(3),
            m2 in map_strategy(3),
            phrase in map_strategy(3),
            lambda in -3.0f64..3.0,
            logits in prop::collection::vec(-2.0f64..2.0, 2),
        ) {
            let w = softmax_importance(&logits).unwrap();
            let zero = ScoreMap::filled(3, 0.0);
            let combo = m1.map_valid(|s, e, v| v + lambda * m2.get(s, e).unwrap());
            let fused_combo = fuse_score_maps(&combo, &[&phrase], &w).unwrap();
            let f1 = fuse_score_maps(&m1, &[&phrase], &w).unwrap();
            let f2 = fuse_score_maps(&m2, &[&zero], &w).unwrap();
            for (s, e, v) in fused_combo.valid_cells() {
                let expect = f1.get(s, e).unwrap() + lambda * f2.get(s, e).unwrap();
                prop_assert!((v - expect).abs() < 1e-9);
            }
        }
    }
}
