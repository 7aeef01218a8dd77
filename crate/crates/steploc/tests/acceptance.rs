//! Whole-toolkit acceptance checks.
//!
//! Each test verifies one shipped guarantee end to end and prints a single
//! `PASS: ...` line carrying the numbers it actually measured (visible with
//! `cargo test --test acceptance -- --nocapture`). A failed guarantee
//! prints a `FAIL: ...` line and panics with the same detail.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use steploc::format;
use steploc::fusion::{cosine_score_map, fuse_score_maps, softmax_importance, ImportanceWeights};
use steploc::losses::{bce_grad, bce_loss, exclusiveness_loss};
use steploc::metrics::{average_recall, overlap_fraction};
use steploc::pipeline::{
    run_pipeline, run_pipeline_files, select_videos, PipelineConfig, SelectConfig,
};
use steploc::solver::dp_table_bytes;
use steploc::synth::{generate_synthetic, SyntheticSpec};
use steploc::{
    brute_force_select, dp_select, greedy_select, Assignment, LogProbStack, ScoreMap, ScoreStack,
    SelectMethod, TemporalFeatureMap,
};

use steploc::bench::{bench, BenchConfig};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn criterion(name: &str, check: impl FnOnce() -> Result<String, String>) {
    match check() {
        Ok(detail) => println!("PASS: {name} — {detail}"),
        Err(detail) => {
            println!("FAIL: {name} — {detail}");
            panic!("{name}: {detail}");
        }
    }
}

/// Dense random instance: every valid cell finite, masked cells `-inf`.
fn random_instance(rng: &mut ChaCha8Rng, num_queries: usize, num_clips: usize) -> LogProbStack {
    let mut values = vec![f64::NEG_INFINITY; num_queries * num_clips * num_clips];
    for query in 0..num_queries {
        for start in 0..num_clips {
            for end in start..num_clips {
                values[(query * num_clips + start) * num_clips + end] =
                    rng.random_range(-6.0..-0.05);
            }
        }
    }
    LogProbStack::new("t", num_queries, num_clips, values).expect("dense instance is well-formed")
}

fn intervals(a: &Assignment) -> Vec<(usize, usize)> {
    a.entries
        .iter()
        .map(|e| (e.interval.start(), e.interval.end()))
        .collect()
}

#[test]
fn exact_solver_matches_brute_force_oracle() {
    criterion("exact solver matches the brute-force oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        let mut max_delta = 0.0f64;
        let total = 520usize;
        for instance in 0..total {
            let num_clips = rng.random_range(2..=8usize);
            let num_queries = rng.random_range(1..=num_clips.min(4));
            let logp = random_instance(&mut rng, num_queries, num_clips);
            let dp = dp_select(&logp, 17).map_err(|e| e.to_string())?;
            let oracle = brute_force_select(&logp).map_err(|e| e.to_string())?;
            ensure!(
                !dp.fallback_used,
                "instance {instance}: unexpected fallback"
            );
            ensure!(
                dp.is_disjoint(),
                "instance {instance}: dp assignment overlaps"
            );
            ensure!(
                oracle.is_disjoint(),
                "instance {instance}: oracle assignment overlaps"
            );
            let delta = (dp.objective - oracle.objective).abs();
            max_delta = max_delta.max(delta);
            ensure!(
                delta <= 1e-9,
                "instance {instance} (K={num_queries}, N={num_clips}): objectives differ by {delta:e}"
            );
            ensure!(
                intervals(&dp) == intervals(&oracle),
                "instance {instance} (K={num_queries}, N={num_clips}): intervals differ: {:?} vs {:?}",
                intervals(&dp),
                intervals(&oracle)
            );
        }
        Ok(format!(
            "{total} random instances, K 1..4, N 2..8: identical intervals, max objective delta {max_delta:.1e}"
        ))
    });
}

#[test]
fn exact_assignments_never_overlap() {
    criterion("exact assignments never overlap", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2002);
        let mut exact = Vec::new();

        // Random sweep over the documented domain, cost-capped per instance
        // so a thousand solves stay in the seconds range. N = 64 is reached
        // for K <= 7; the larger query counts cap N lower.
        for _ in 0..1000 {
            let num_queries = rng.random_range(1..=10usize);
            let cost_cap = 4.0e6;
            let per_cell = (num_queries * (1usize << num_queries)) as f64;
            let max_clips = ((cost_cap / per_cell).sqrt() as usize).clamp(num_queries, 64);
            let num_clips = rng.random_range(num_queries..=max_clips);
            let logp = random_instance(&mut rng, num_queries, num_clips);
            let dp = dp_select(&logp, 17).map_err(|e| e.to_string())?;
            ensure!(
                !dp.fallback_used,
                "unexpected fallback at K={num_queries}, N={num_clips}"
            );
            ensure!(
                dp.is_disjoint(),
                "overlap at K={num_queries}, N={num_clips}"
            );
            exact.push(dp);
        }

        // Corners of the domain, checked explicitly.
        for (k, n) in [(1usize, 1usize), (10, 10), (7, 64), (10, 64)] {
            let logp = random_instance(&mut rng, k, n);
            let dp = dp_select(&logp, 17).map_err(|e| e.to_string())?;
            ensure!(
                !dp.fallback_used && dp.is_disjoint(),
                "corner K={k}, N={n} failed"
            );
            exact.push(dp);
        }

        // Instances built to collide: every query peaks on one shared cell,
        // so the independent-argmax baseline overlaps while the exact
        // solver must not.
        let mut baseline = Vec::new();
        for _ in 0..50 {
            let num_clips = rng.random_range(6..=16usize);
            let num_queries = rng.random_range(2..=4usize);
            let peak_start = rng.random_range(0..num_clips);
            let peak_end = rng.random_range(peak_start..num_clips);
            let mut values = vec![f64::NEG_INFINITY; num_queries * num_clips * num_clips];
            for query in 0..num_queries {
                for start in 0..num_clips {
                    for end in start..num_clips {
                        values[(query * num_clips + start) * num_clips + end] =
                            rng.random_range(-6.0..-1.0);
                    }
                }
                values[(query * num_clips + peak_start) * num_clips + peak_end] = -0.01;
            }
            let logp = LogProbStack::new("t", num_queries, num_clips, values).unwrap();
            baseline.push(greedy_select(&logp).map_err(|e| e.to_string())?);
            let dp = dp_select(&logp, 17).map_err(|e| e.to_string())?;
            ensure!(
                dp.is_disjoint(),
                "collision instance: exact solver overlapped"
            );
            exact.push(dp);
        }

        let exact_overlap = overlap_fraction(&exact);
        let baseline_overlap = overlap_fraction(&baseline);
        ensure!(
            exact_overlap == 0.0,
            "exact overlap fraction {exact_overlap}%, expected exactly 0"
        );
        ensure!(
            baseline_overlap > 0.0,
            "collision instances produced no greedy overlap"
        );
        Ok(format!(
            "{} exact assignments across K<=10, N<=64: overlap {exact_overlap}%; greedy overlaps {baseline_overlap:.1}% on collision instances",
            exact.len()
        ))
    });
}

#[test]
fn dp_resolves_the_collision_greedy_makes() {
    criterion(
        "dp resolves the collision the independent argmax makes",
        || {
            let map_a = [
                (0, 0, -0.2),
                (0, 1, -0.1),
                (0, 2, -0.5),
                (1, 1, -1.0),
                (1, 2, -0.9),
                (2, 2, -1.5),
            ];
            let map_b = [
                (0, 0, -0.8),
                (0, 1, -0.05),
                (0, 2, -0.6),
                (1, 1, -0.7),
                (1, 2, -0.25),
                (2, 2, -0.4),
            ];
            let build = |cells: &[(usize, usize, f64)]| {
                ScoreMap::from_fn(3, |s, e| {
                    cells
                        .iter()
                        .find(|&&(cs, ce, _)| cs == s && ce == e)
                        .expect("all valid cells specified")
                        .2
                })
            };
            let logp = LogProbStack::from_maps("t", &[build(&map_a), build(&map_b)])
                .map_err(|e| e.to_string())?;

            let dp = dp_select(&logp, 17).map_err(|e| e.to_string())?;
            ensure!(
                intervals(&dp) == vec![(0, 0), (1, 2)],
                "dp picked {:?}, expected [(0,0), (1,2)]",
                intervals(&dp)
            );
            ensure!(
                (dp.objective + 0.45).abs() <= 1e-9,
                "dp objective {}, expected -0.45",
                dp.objective
            );
            ensure!(dp.is_disjoint(), "dp assignment overlaps");

            let greedy = greedy_select(&logp).map_err(|e| e.to_string())?;
            ensure!(
                intervals(&greedy) == vec![(0, 1), (0, 1)],
                "greedy picked {:?}, expected both queries on the shared peak (0,1)",
                intervals(&greedy)
            );
            ensure!(!greedy.is_disjoint(), "greedy unexpectedly disjoint");
            Ok(format!(
                "dp assigns [0,0] and [1,2] at objective {:.6}; greedy collides on [0,1]",
                dp.objective
            ))
        },
    );
}

#[test]
fn average_recall_matches_reference_values() {
    criterion("average recall matches the reference triples", || {
        let first = average_recall(&[59.43, 46.73, 27.57]).map_err(|e| e.to_string())?;
        let second = average_recall(&[70.22, 56.83, 34.73]).map_err(|e| e.to_string())?;
        ensure!(
            (first - 44.58).abs() <= 0.01,
            "mean of first triple {first}, expected 44.58 ± 0.01"
        );
        ensure!(
            (second - 53.93).abs() <= 0.01,
            "mean of second triple {second}, expected 53.93 ± 0.01"
        );
        Ok(format!(
            "({first:.4}, {second:.4}) vs reference (44.58, 53.93) ± 0.01"
        ))
    });
}

#[test]
fn fusion_identities_hold() {
    criterion("fusion identities hold", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5005);
        let trials = 200usize;
        for trial in 0..trials {
            let n = rng.random_range(1..=6usize);
            let num_phrases = rng.random_range(0..=3usize);

            // Convex-combination bounds: fused values stay inside the
            // per-cell min/max over the component maps.
            let sentence = ScoreMap::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
            let phrases: Vec<ScoreMap> = (0..num_phrases)
                .map(|_| ScoreMap::from_fn(n, |_, _| rng.random_range(-1.0..=1.0)))
                .collect();
            let logits: Vec<f64> = (0..=num_phrases)
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            let weights = softmax_importance(&logits).map_err(|e| e.to_string())?;
            let refs: Vec<&ScoreMap> = phrases.iter().collect();
            let fused = fuse_score_maps(&sentence, &refs, &weights).map_err(|e| e.to_string())?;
            for (s, e, v) in fused.valid_cells() {
                let mut lo = sentence.get(s, e).unwrap();
                let mut hi = lo;
                for p in &phrases {
                    let x = p.get(s, e).unwrap();
                    lo = lo.min(x);
                    hi = hi.max(x);
                }
                ensure!(
                    v >= lo - 1e-6 && v <= hi + 1e-6,
                    "trial {trial}: fused {v} outside [{lo}, {hi}] at ({s}, {e})"
                );
            }

            // Positive rescaling of the text vector leaves cosine maps
            // unchanged.
            let dim = rng.random_range(2..=4usize);
            let features = TemporalFeatureMap::from_fn(n, dim, |_, _| {
                (0..dim).map(|_| rng.random_range(0.2..1.5)).collect()
            })
            .unwrap();
            let text: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..1.5)).collect();
            let scale = rng.random_range(0.01..100.0);
            let scaled: Vec<f64> = text.iter().map(|v| v * scale).collect();
            let plain = cosine_score_map(&features, &text).map_err(|e| e.to_string())?;
            let rescaled = cosine_score_map(&features, &scaled).map_err(|e| e.to_string())?;
            for ((s, e, a), (_, _, b)) in plain.valid_cells().zip(rescaled.valid_cells()) {
                ensure!(
                    (a - b).abs() <= 1e-6,
                    "trial {trial}: cosine changed under x{scale:.2} rescale at ({s}, {e}): {a} vs {b}"
                );
            }

            // Adding a constant to every logit leaves the softmax weights
            // unchanged.
            let shift = rng.random_range(-5.0..5.0);
            let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
            let reweighted = softmax_importance(&shifted).map_err(|e| e.to_string())?;
            ensure!(
                (weights.sentence_weight() - reweighted.sentence_weight()).abs() <= 1e-9,
                "trial {trial}: sentence weight moved under logit shift {shift}"
            );
            for (a, b) in weights
                .phrase_weights()
                .iter()
                .zip(reweighted.phrase_weights())
            {
                ensure!(
                    (a - b).abs() <= 1e-9,
                    "trial {trial}: phrase weight moved under logit shift {shift}"
                );
            }

            // Weight 1 on the sentence with no phrases reproduces the map.
            let identity = ImportanceWeights::new(1.0, vec![]).map_err(|e| e.to_string())?;
            let same = fuse_score_maps(&sentence, &[], &identity).map_err(|e| e.to_string())?;
            for ((s, e, a), (_, _, b)) in sentence.valid_cells().zip(same.valid_cells()) {
                ensure!(
                    (a - b).abs() <= 1e-6,
                    "trial {trial}: identity fusion changed ({s}, {e}): {a} vs {b}"
                );
            }
        }
        Ok(format!(
            "{trials} randomized trials: convex bounds, cosine scale invariance, \
             softmax shift invariance, identity fusion"
        ))
    });
}

#[test]
fn loss_terms_behave_as_specified() {
    criterion("loss terms behave as specified", || {
        let mut rng = ChaCha8Rng::seed_from_u64(6006);

        // Exclusiveness is zero exactly when per-cell supports are
        // disjoint, checked in both directions over random constructions.
        for trial in 0..200 {
            let n = rng.random_range(1..=6usize);
            let k = rng.random_range(1..=4usize);
            let owner = ScoreMap::from_fn(n, |_, _| rng.random_range(0..k) as f64);
            let value = ScoreMap::from_fn(n, |_, _| rng.random_range(0.1..=1.0));
            let maps: Vec<ScoreMap> = (0..k)
                .map(|q| {
                    ScoreMap::from_fn(n, |s, e| {
                        if owner.get(s, e).unwrap() as usize == q {
                            value.get(s, e).unwrap()
                        } else {
                            0.0
                        }
                    })
                })
                .collect();
            let disjoint = ScoreStack::new("t", maps.clone()).map_err(|e| e.to_string())?;
            let exc = exclusiveness_loss(&disjoint).map_err(|e| e.to_string())?;
            ensure!(exc == 0.0, "trial {trial}: disjoint supports scored {exc}");

            if k >= 2 {
                // Force one shared positive cell; the loss must see it.
                let cs = rng.random_range(0..n);
                let ce = rng.random_range(cs..n);
                let shared: Vec<ScoreMap> = maps
                    .iter()
                    .enumerate()
                    .map(|(q, m)| {
                        m.map_valid(|s, e, v| {
                            if (s, e) == (cs, ce) && q < 2 {
                                0.5 + 0.1 * q as f64
                            } else {
                                v
                            }
                        })
                    })
                    .collect();
                let stack = ScoreStack::new("t", shared).map_err(|e| e.to_string())?;
                let exc = exclusiveness_loss(&stack).map_err(|e| e.to_string())?;
                ensure!(
                    exc > 0.0,
                    "trial {trial}: shared cell ({cs}, {ce}) went unnoticed"
                );
            }
        }

        // Two queries agreeing on a single cell of a 3-clip grid: one of
        // the six valid cells contributes top-2 product 1.
        let spike = ScoreMap::from_fn(3, |s, e| if (s, e) == (0, 1) { 1.0 } else { 0.0 });
        let stack = ScoreStack::new("t", vec![spike.clone(), spike]).map_err(|e| e.to_string())?;
        let exc = exclusiveness_loss(&stack).map_err(|e| e.to_string())?;
        ensure!(
            exc == 1.0 / 6.0,
            "shared-spike example scored {exc}, expected exactly 1/6"
        );

        // A single query can never conflict with itself.
        let solo = ScoreStack::new(
            "t",
            vec![ScoreMap::from_fn(4, |_, _| rng.random_range(0.0..=1.0))],
        )
        .map_err(|e| e.to_string())?;
        let exc = exclusiveness_loss(&solo).map_err(|e| e.to_string())?;
        ensure!(exc == 0.0, "single-query stack scored {exc}");

        // Central finite differences confirm the analytic cross-entropy
        // gradient cell by cell.
        let h = 1e-5;
        let mut max_rel = 0.0f64;
        for _ in 0..50 {
            let n = rng.random_range(2..=5usize);
            let pred = ScoreMap::from_fn(n, |_, _| rng.random_range(0.05..0.95));
            let target = ScoreMap::from_fn(n, |_, _| rng.random_range(0.0..=1.0));
            let grad = bce_grad(&pred, &target).map_err(|e| e.to_string())?;
            for (s, e, _) in pred.valid_cells() {
                let plus = pred.map_valid(|ss, ee, v| if (ss, ee) == (s, e) { v + h } else { v });
                let minus = pred.map_valid(|ss, ee, v| if (ss, ee) == (s, e) { v - h } else { v });
                let fd = (bce_loss(&plus, &target).map_err(|e| e.to_string())?
                    - bce_loss(&minus, &target).map_err(|e| e.to_string())?)
                    / (2.0 * h);
                let g = grad.get(s, e).unwrap();
                let rel = (fd - g).abs() / g.abs().max(fd.abs()).max(1e-3);
                max_rel = max_rel.max(rel);
                ensure!(
                    rel <= 1e-3,
                    "gradient at ({s}, {e}): analytic {g}, finite-difference {fd}, rel {rel:e}"
                );
            }
        }
        Ok(format!(
            "exclusiveness zero iff supports disjoint (200 trials); shared-spike case = 1/6 exactly; \
             cross-entropy gradient max relative error {max_rel:.1e} at h = 1e-5"
        ))
    });
}

#[test]
fn solver_time_scales_in_queries_and_clips() {
    criterion(
        "solver time scales as documented and the full-size solve fits the budget",
        || {
            let report = bench(&BenchConfig {
                num_queries: 10,
                num_clips: 64,
                repeats: 7,
                seed: 7007,
                cap: 17,
            })
            .map_err(|e| e.to_string())?;
            ensure!(
                report.query_ratio_in_band,
                "query ratio {:.2} outside [{}, {}]",
                report.query_ratio,
                report.query_band.0,
                report.query_band.1
            );
            ensure!(
                report.clip_ratio_in_band,
                "clip ratio {:.2} outside [{}, {}]",
                report.clip_ratio,
                report.clip_band.0,
                report.clip_band.1
            );

            // The largest instance the exact path accepts by default:
            // 17 queries on a 128-clip grid.
            let mut rng = ChaCha8Rng::seed_from_u64(7008);
            let logp = random_instance(&mut rng, 17, 128);
            let table_bytes = dp_table_bytes(17, 128);
            let started = Instant::now();
            let full = dp_select(&logp, 17).map_err(|e| e.to_string())?;
            let seconds = started.elapsed().as_secs_f64();
            ensure!(!full.fallback_used, "full-size solve fell back to greedy");
            ensure!(
                full.entries.len() == 17 && full.is_disjoint(),
                "full-size assignment malformed"
            );
            ensure!(
                seconds <= 600.0,
                "full-size solve took {seconds:.1}s, budget 600s"
            );
            ensure!(
                table_bytes <= 8 << 30,
                "tables need {table_bytes} bytes, budget 8 GiB"
            );
            Ok(format!(
                "query ratio {:.2} in [{}, {}]; clip ratio {:.2} in [{}, {}]; \
                 17-query/128-clip exact solve in {seconds:.2}s using {} MiB of tables \
                 (budget 600s / 8 GiB)",
                report.query_ratio,
                report.query_band.0,
                report.query_band.1,
                report.clip_ratio,
                report.clip_band.0,
                report.clip_band.1,
                table_bytes >> 20
            ))
        },
    );
}

#[test]
fn synthetic_end_to_end_recall_and_dominance() {
    criterion(
        "synthetic end to end: perfect noiseless recall, dp dominates greedy under noise",
        || {
            // Noiseless: the fused peak sits exactly on the ground truth,
            // so every threshold scores 100 and nothing overlaps.
            let clean = SyntheticSpec {
                num_videos: 12,
                num_clips: 24,
                queries_min: 2,
                queries_max: 6,
                noise_sigma: 0.0,
                seed: 42,
                score_sharpness: 1.0,
            };
            let (scores, gt) = generate_synthetic(&clean).map_err(|e| e.to_string())?;
            let cfg = PipelineConfig {
                thresholds: vec![0.3, 0.5, 0.7, 0.9],
                ..Default::default()
            };
            let outcome = run_pipeline(&scores, &gt, &cfg).map_err(|e| e.to_string())?;
            for entry in &outcome.report.recall_at {
                ensure!(
                    entry.recall == 100.0,
                    "noiseless R@1 at IoU {} was {}",
                    entry.threshold,
                    entry.recall
                );
            }
            ensure!(
                outcome.report.overlap_fraction == 0.0,
                "noiseless overlap {}%",
                outcome.report.overlap_fraction
            );

            // Moderate noise: the exact solution stays disjoint, the
            // baseline does not, and on every video where the baseline
            // happens to be feasible the exact objective is at least as
            // good.
            let noisy = SyntheticSpec {
                num_videos: 12,
                num_clips: 24,
                queries_min: 3,
                queries_max: 6,
                noise_sigma: 0.3,
                seed: 11,
                score_sharpness: 1.0,
            };
            let (scores, _) = generate_synthetic(&noisy).map_err(|e| e.to_string())?;
            let base = SelectConfig::default();
            let (dp, _) = select_videos(&scores, &base, 0).map_err(|e| e.to_string())?;
            let greedy_cfg = SelectConfig {
                method: SelectMethod::Greedy,
                ..base
            };
            let (greedy, _) = select_videos(&scores, &greedy_cfg, 0).map_err(|e| e.to_string())?;
            let dp_overlap = overlap_fraction(&dp);
            let greedy_overlap = overlap_fraction(&greedy);
            ensure!(dp_overlap == 0.0, "dp overlap {dp_overlap}%");
            ensure!(
                greedy_overlap > 0.0,
                "pinned noisy seed produced no greedy collision; the comparison is vacuous"
            );
            let mut feasible = 0usize;
            for (d, g) in dp.iter().zip(&greedy) {
                if g.is_disjoint() {
                    feasible += 1;
                    ensure!(
                        d.objective >= g.objective - 1e-12,
                        "video {}: dp objective {} below feasible greedy {}",
                        d.video_id,
                        d.objective,
                        g.objective
                    );
                }
            }
            Ok(format!(
                "noiseless AVG {:.2}, overlap 0%; noisy: dp overlap 0% vs greedy {greedy_overlap:.1}%, \
                 dp >= greedy objective on all {feasible} greedy-feasible videos",
                outcome.report.avg
            ))
        },
    );
}

#[test]
fn prediction_files_identical_across_worker_counts() {
    criterion(
        "prediction files are byte-identical across worker counts",
        || {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let spec = SyntheticSpec {
                num_videos: 10,
                num_clips: 20,
                queries_min: 2,
                queries_max: 5,
                noise_sigma: 0.2,
                seed: 99,
                score_sharpness: 2.0,
            };
            let (scores, gt) = generate_synthetic(&spec).map_err(|e| e.to_string())?;
            let scores_path = dir.path().join("scores.json");
            let gt_path = dir.path().join("gt.json");
            format::write_scores_json(&scores_path, &scores).map_err(|e| e.to_string())?;
            format::write_ground_truth(&gt_path, &gt).map_err(|e| e.to_string())?;

            let mut outputs = Vec::new();
            for workers in [1usize, 5] {
                let out = dir.path().join(format!("predictions-{workers}.json"));
                let cfg = PipelineConfig {
                    workers,
                    ..Default::default()
                };
                run_pipeline_files(&scores_path, &gt_path, Some(&out), None, &cfg)
                    .map_err(|e| e.to_string())?;
                outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
            }
            ensure!(!outputs[0].is_empty(), "prediction file is empty");
            ensure!(
                outputs[0] == outputs[1],
                "files differ between 1 and 5 workers"
            );
            Ok(format!(
                "1-worker and 5-worker runs wrote identical {}-byte prediction files",
                outputs[0].len()
            ))
        },
    );
}
