//! Acceptance suite: the gate the whole artifact must pass.
//!
//! Each test prints one `acceptance <name>: PASS/FAIL` line (visible under
//! `cargo test -- --nocapture`) and enforces its runtime budget where one
//! is defined. Expected values follow the "oracle first" rule: every
//! nontrivial number asserted here is computed by an independent method
//! inside this file (brute-force enumeration, dense inversion, quadrature
//! or closed-form moments) before being compared to the library.

use std::time::{Duration, Instant};

use medgraph::clime::{clime_columns, clime_estimate, max_constraint_violation, ClimeConfig};
use medgraph::correlation::{kendall_net_count, kendall_tau_matrix, kendall_tau_pair};
use medgraph::error::Error;
use medgraph::evaluation::roc_sweep_full;
use medgraph::graph::{upper_triangle_pairs, BinaryGraph};
use medgraph::matrix::{CorrelationMatrix, DatasetCollection};
use medgraph::median::{sparse_median, verify_median_oracle, TiePolicy};
use medgraph::pipeline::{run_pipeline, PipelineConfig, PipelineKind, Tuning};
use medgraph::stars::{stars_select, CorrelationKind, StarsConfig};
use medgraph::synthetic::{
    npn_transform_inverse, substream, validate_constants, GraphPattern, Marginals,
    SyntheticScenario,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Runs one criterion, prints its PASS/FAIL line, enforces the budget.
fn criterion(name: &str, budget: Option<Duration>, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    match &outcome {
        Ok(detail) => {
            println!("acceptance {name}: PASS ({detail}; {elapsed:.2?})");
        }
        Err(reason) => {
            println!("acceptance {name}: FAIL ({reason}; {elapsed:.2?})");
            panic!("criterion {name} failed: {reason}");
        }
    }
    if let Some(limit) = budget {
        assert!(
            elapsed <= limit,
            "criterion {name} exceeded its {limit:.0?} budget: {elapsed:.2?}"
        );
    }
}

/// Quadratic-time oracle for the net concordance count of Kendall's tau.
fn brute_net(x: &[f64], y: &[f64]) -> i64 {
    let mut net = 0i64;
    for i in 0..x.len() {
        for l in i + 1..x.len() {
            if x[i] != x[l] && y[i] != y[l] {
                net += ((x[i] - x[l]).signum() * (y[i] - y[l]).signum()) as i64;
            }
        }
    }
    net
}

/// 1. The O(n log n) tau equals the O(n^2) pairwise definition exactly on
///    1000 random pairs, with and without ties.
#[test]
fn criterion_01_kendall_fast_slow_equivalence() {
    criterion(
        "01 kendall fast/slow equivalence",
        Some(Duration::from_secs(10)),
        || {
            let mut rng = substream(101, "acceptance-tau", 0);
            let mut with_ties = 0usize;
            for case in 0..1000 {
                let n = rng.random_range(2..=500);
                let tie_grid = match case % 3 {
                    0 => None,                              // continuous
                    1 => Some(rng.random_range(2..12u32)),  // heavy ties
                    _ => Some(rng.random_range(12..60u32)), // light ties
                };
                let draw = |rng: &mut ChaCha8Rng| -> f64 {
                    match tie_grid {
                        None => rng.random::<f64>() * 10.0 - 5.0,
                        Some(levels) => rng.random_range(0..levels) as f64 * 0.25,
                    }
                };
                let x: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
                let y: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
                let fast = kendall_net_count(&x, &y).map_err(|e| e.to_string())?;
                let slow = brute_net(&x, &y);
                if fast != slow {
                    return Err(format!("case {case}: fast {fast} != slow {slow} (n={n})"));
                }
                let tau = kendall_tau_pair(&x, &y).map_err(|e| e.to_string())?;
                let pairs = (n as i64) * (n as i64 - 1) / 2;
                if tau != slow as f64 / pairs as f64 {
                    return Err(format!("case {case}: tau mismatch"));
                }
                if tie_grid.is_some() {
                    with_ties += 1;
                }
            }
            Ok(format!("1000 pairs, {with_ties} with tie-inducing grids"))
        },
    );
}

/// Random well-conditioned correlation matrix via a random orthogonal
/// basis and eigenvalues in [0.5, 2].
fn random_correlation(d: usize, rng: &mut ChaCha8Rng) -> CorrelationMatrix {
    let gauss = DMatrix::from_fn(d, d, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    let q = gauss.qr().q();
    let eigs = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            0.5 + 1.5 * rng.random::<f64>()
        } else {
            0.0
        }
    });
    let m = &q * eigs * q.transpose();
    let inv_sd: Vec<f64> = (0..d).map(|j| 1.0 / m[(j, j)].sqrt()).collect();
    let corr = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            0.5 * (m[(i, j)] + m[(j, i)]) * inv_sd[i] * inv_sd[j]
        }
    });
    CorrelationMatrix::from_matrix(corr).expect("construction keeps invariants")
}

/// 2. At lambda = 0 the estimate equals the dense inverse.
#[test]
fn criterion_02_clime_lambda_zero_oracle() {
    criterion(
        "02 clime lambda=0 inverse oracle",
        Some(Duration::from_secs(30)),
        || {
            let mut rng = substream(202, "acceptance-clime0", 0);
            let mut worst: f64 = 0.0;
            for case in 0..50 {
                let d = 2 + case % 9; // d in 2..=10
                let r = random_correlation(d, &mut rng);
                let inv = r
                    .values()
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| format!("case {case}: singular test matrix"))?;
                // the generator bounds the spectrum, keep it honest
                let eigs = r.values().clone().symmetric_eigen().eigenvalues;
                let cond = eigs.max() / eigs.min();
                #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail
                if !(cond < 1.0e3) {
                    return Err(format!("case {case}: condition number {cond} out of range"));
                }
                let est = clime_estimate(&r, &ClimeConfig::new(0.0)).map_err(|e| e.to_string())?;
                let gap = (est.values() - &inv).abs().max();
                worst = worst.max(gap);
                if gap > 1e-6 {
                    return Err(format!(
                        "case {case} (d={d}): max-norm gap {gap:.3e} > 1e-6"
                    ));
                }
            }
            Ok(format!("50 matrices, worst max-norm gap {worst:.3e}"))
        },
    );
}

/// 3. Every returned solve satisfies the residual constraint within 1e-8
///    and the columnwise l1 objective never grows with the penalty.
#[test]
fn criterion_03_clime_feasibility_and_shrinkage() {
    criterion("03 clime feasibility & shrinkage", None, || {
        let mut rng = substream(303, "acceptance-clime-grid", 0);
        for case in 0..5 {
            let r = random_correlation(8, &mut rng);
            let mut previous = f64::INFINITY;
            for step in 0..10 {
                let lambda = 0.05 * step as f64;
                let raw = clime_columns(&r, lambda).map_err(|e| e.to_string())?;
                let violation = max_constraint_violation(&r, &raw, lambda);
                if violation > 1e-8 {
                    return Err(format!(
                        "case {case} lambda {lambda}: constraint violated by {violation:.3e}"
                    ));
                }
                let total: f64 = raw.objectives.iter().sum();
                if total > previous + 1e-9 {
                    return Err(format!(
                        "case {case}: objective rose from {previous} to {total} at lambda {lambda}"
                    ));
                }
                previous = total;
            }
        }
        Ok("5 matrices x 10-point penalty grid".into())
    });
}

/// 4. The top-count closed form agrees exactly with exhaustive search, and
///    boundary ties surface as errors.
#[test]
fn criterion_04_median_closed_form_vs_exhaustive() {
    criterion(
        "04 median closed form vs exhaustive oracle",
        Some(Duration::from_secs(60)),
        || {
            let mut rng = substream(404, "acceptance-median", 0);
            let mut verified = 0;
            let mut ties = 0;
            let mut draws = 0;
            while verified < 100 {
                draws += 1;
                if draws > 10_000 {
                    return Err("instance generator starved".into());
                }
                let d = rng.random_range(3..=6);
                let t = rng.random_range(1..=5);
                let graphs: Vec<BinaryGraph> = (0..t)
                    .map(|_| {
                        BinaryGraph::from_edges(
                            d,
                            upper_triangle_pairs(d).filter(|_| rng.random::<f64>() < 0.4),
                        )
                        .expect("valid pairs")
                    })
                    .collect();
                let max_edges = d * (d - 1) / 2;
                let s = rng.random_range(0..=max_edges);
                match sparse_median(&graphs, s, TiePolicy::Error) {
                    Ok(result) => {
                        if result.graph.edge_count() != s {
                            return Err(format!(
                                "result has {} edges, wanted {s}",
                                result.graph.edge_count()
                            ));
                        }
                        match verify_median_oracle(&graphs, s, &result.graph) {
                            Ok(true) => verified += 1,
                            Ok(false) => {
                                return Err(format!(
                                    "exhaustive search beat the closed form (d={d}, t={t}, s={s})"
                                ))
                            }
                            Err(e) => return Err(e.to_string()),
                        }
                    }
                    Err(Error::TieAtRankS { tied, .. }) => {
                        // manual boundary check: counts at ranks s and s+1 match
                        let counts = medgraph::median::edge_counts(&graphs).expect("non-empty");
                        let mut sorted: Vec<u32> = upper_triangle_pairs(d)
                            .map(|(j, k)| counts.count(j, k))
                            .collect();
                        sorted.sort_unstable_by(|a, b| b.cmp(a));
                        if s == 0 || s == max_edges || sorted[s - 1] != sorted[s] {
                            return Err(format!("spurious tie report at s={s}: {tied:?}"));
                        }
                        ties += 1;
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
            if ties == 0 {
                return Err("no boundary-tie instances encountered".into());
            }
            Ok(format!(
                "100 instances verified, {ties} boundary ties correctly rejected"
            ))
        },
    );
}

/// 5. Closed-form normalizing constants match quadrature, and each
///    transform's sample moments are (0, 1) at Monte-Carlo scale.
#[test]
fn criterion_05_transform_normalization() {
    criterion("05 transform constants & moments", None, || {
        validate_constants(1e-8).map_err(|e| e.to_string())?;
        let n = 1_000_000usize;
        let mut details = Vec::new();
        for k in 1..=5 {
            let mut rng = substream(505, "acceptance-transform", k as u64);
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            for _ in 0..n {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                let x = npn_transform_inverse(k, z);
                sum += x;
                sum_sq += x * x;
            }
            let mean = sum / n as f64;
            let var = sum_sq / n as f64 - mean * mean;
            if mean.abs() > 0.05 {
                return Err(format!("transform {k}: mean {mean:.4} off zero"));
            }
            if (var - 1.0).abs() > 0.05 {
                return Err(format!("transform {k}: variance {var:.4} off one"));
            }
            details.push(format!("h{k} mean {mean:+.4} var {var:.4}"));
        }
        Ok(details.join(", "))
    });
}

/// 6. Rank correlations of the observed data equal those of the latent
///    Gaussian draws bit for bit.
#[test]
fn criterion_06_monotone_invariance_cornerstone() {
    criterion("06 monotone invariance of tau", None, || {
        let scenarios = [
            SyntheticScenario::new(10, 3, 120, GraphPattern::Banded { bandwidth: 1 }, 2024),
            SyntheticScenario::new(12, 2, 75, GraphPattern::Random { edge_prob: 0.25 }, 7),
        ];
        let mut checked = 0;
        for scenario in scenarios {
            let generated = scenario.generate().map_err(|e| e.to_string())?;
            for ds in &generated.datasets {
                let observed = kendall_tau_matrix(&ds.observations).map_err(|e| e.to_string())?;
                let latent = kendall_tau_matrix(&ds.latent).map_err(|e| e.to_string())?;
                if observed.values() != latent.values() {
                    return Err("tau matrices differ between observed and latent data".into());
                }
                checked += 1;
            }
        }
        Ok(format!("{checked} datasets, exact equality"))
    });
}

/// 7. Across the five patterns the rank pipeline dominates the sample
///    correlation pipeline, which dominates naive pooling.
#[test]
fn criterion_07_pipeline_ordering_across_patterns() {
    criterion(
        "07 pipeline ROC ordering",
        Some(Duration::from_secs(900)),
        || {
            let d = 40;
            let patterns: [GraphPattern; 5] = [
                GraphPattern::Banded { bandwidth: 1 },
                GraphPattern::Clustered {
                    groups: 5,
                    within_prob: 0.3,
                },
                GraphPattern::Hub { hub_count: 2 },
                GraphPattern::Random {
                    edge_prob: 3.0 / d as f64,
                },
                GraphPattern::ScaleFree,
            ];
            // fast-mode penalty, calibrated once for this scale (d=40, n=100)
            let lambda = 0.3;
            let seeds_per_pattern = 10u64;
            let mut overall = [0.0f64; 3]; // np, pearson, kendall
            let mut gap_by_pattern = Vec::new();
            let mut lines = Vec::new();
            for pattern in patterns {
                let mut pattern_auc = [0.0f64; 3];
                for seed in 0..seeds_per_pattern {
                    let scenario = SyntheticScenario::new(d, 10, 100, pattern, 9000 + seed);
                    let generated = scenario.generate().map_err(|e| e.to_string())?;
                    let truth = &generated.median_graph;
                    let inputs = DatasetCollection::new(generated.observation_matrices())
                        .map_err(|e| e.to_string())?;
                    for (slot, kind) in [
                        PipelineKind::Np,
                        PipelineKind::Pearson,
                        PipelineKind::Kendall,
                    ]
                    .into_iter()
                    .enumerate()
                    {
                        let cfg = PipelineConfig {
                            tie_policy: TiePolicy::Lexicographic,
                            ..PipelineConfig::new(
                                kind,
                                truth.edge_count(),
                                Tuning::FixedAll(lambda),
                            )
                        };
                        let out = run_pipeline(&inputs, &cfg).map_err(|e| e.to_string())?;
                        let curve =
                            roc_sweep_full(&out.ranking, truth).map_err(|e| e.to_string())?;
                        pattern_auc[slot] += curve.auc;
                    }
                }
                for (o, p) in overall.iter_mut().zip(pattern_auc) {
                    *o += p;
                }
                let m = seeds_per_pattern as f64;
                gap_by_pattern.push((pattern_auc[2] - pattern_auc[1]) / m);
                lines.push(format!(
                    "{}: np {:.3} pearson {:.3} kendall {:.3}",
                    pattern.name(),
                    pattern_auc[0] / m,
                    pattern_auc[1] / m,
                    pattern_auc[2] / m
                ));
            }
            let runs = (seeds_per_pattern * 5) as f64;
            let (np, pearson, kendall) = (overall[0] / runs, overall[1] / runs, overall[2] / runs);
            if !(kendall > pearson && pearson > np) {
                return Err(format!(
                "ordering violated: kendall {kendall:.4}, pearson {pearson:.4}, np {np:.4} [{}]",
                lines.join("; ")
            ));
            }
            let mean_gap: f64 = gap_by_pattern.iter().sum::<f64>() / gap_by_pattern.len() as f64;
            if mean_gap < 0.02 {
                return Err(format!(
                    "kendall-pearson gap {mean_gap:.4} < 0.02 [{}]",
                    lines.join("; ")
                ));
            }
            Ok(format!(
                "kendall {kendall:.4} > pearson {pearson:.4} > np {np:.4}, mean gap {mean_gap:.4}"
            ))
        },
    );
}

/// 8. Exact consensus recovery on an easy Gaussian scenario, with the
///    penalty fixed from one pilot stability-selection run.
#[test]
fn criterion_08_exact_recovery_rate() {
    criterion("08 exact recovery on gaussian banded", None, || {
        let scenario_for = |seed: u64| SyntheticScenario {
            marginals: Marginals::Gaussian,
            ..SyntheticScenario::new(20, 5, 500, GraphPattern::Banded { bandwidth: 1 }, seed)
        };
        // pilot: tune on the first dataset of the first seed
        let pilot = scenario_for(4100).generate().map_err(|e| e.to_string())?;
        let mut rng = substream(4100, "acceptance-pilot", 0);
        let selection = stars_select(
            &pilot.datasets[0].observations,
            CorrelationKind::Kendall,
            &StarsConfig::default(),
            &mut rng,
        )
        .map_err(|e| e.to_string())?;
        if !selection.stable {
            return Err("pilot run found no stable penalty".into());
        }
        let lambda = selection.lambda;

        let seeds = 20u64;
        let mut exact = 0;
        for seed in 4100..4100 + seeds {
            let generated = scenario_for(seed).generate().map_err(|e| e.to_string())?;
            let inputs = DatasetCollection::new(generated.observation_matrices())
                .map_err(|e| e.to_string())?;
            let cfg = PipelineConfig {
                tie_policy: TiePolicy::Lexicographic,
                ..PipelineConfig::new(PipelineKind::Kendall, 19, Tuning::FixedAll(lambda))
            };
            let out = run_pipeline(&inputs, &cfg).map_err(|e| e.to_string())?;
            if out.median.graph == generated.median_graph {
                exact += 1;
            }
        }
        let rate = exact as f64 / seeds as f64;
        if rate < 0.9 {
            return Err(format!(
                "recovered exactly in {exact}/{seeds} seeds at pilot lambda {lambda:.4}"
            ));
        }
        Ok(format!("{exact}/{seeds} exact at pilot lambda {lambda:.4}"))
    });
}

/// 9. Identical compare invocations produce byte-identical output trees.
#[test]
fn criterion_09_compare_determinism() {
    criterion("09 byte-identical compare reruns", None, || {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let run = |dir: &std::path::Path| -> i32 {
            medgraph::cli::cli_main([
                "medgraph",
                "compare",
                "--pattern",
                "scale-free",
                "--d",
                "15",
                "--t",
                "4",
                "--n",
                "80",
                "--seed",
                "33",
                "--perturb-edges",
                "5",
                "--lambda",
                "0.25",
                "--out",
                &dir.display().to_string(),
            ])
        };
        let dir_a = tmp.path().join("a");
        let dir_b = tmp.path().join("b");
        if run(&dir_a) != 0 || run(&dir_b) != 0 {
            return Err("compare run failed".into());
        }
        let mut names = Vec::new();
        for entry in std::fs::read_dir(&dir_a).map_err(|e| e.to_string())? {
            let name = entry.map_err(|e| e.to_string())?.file_name();
            let a = std::fs::read(dir_a.join(&name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dir_b.join(&name))
                .map_err(|_| format!("{name:?} missing from second run"))?;
            if a != b {
                return Err(format!("{name:?} differs between runs"));
            }
            names.push(name);
        }
        if names.len() != 11 {
            return Err(format!("expected 11 output files, saw {}", names.len()));
        }
        Ok(format!("{} files byte-identical", names.len()))
    });
}

/// 10. The consensus Hamming error does not grow with the sample size
///     under a penalty schedule shrinking like sqrt(log d / n).
#[test]
fn criterion_10_hamming_error_nonincreasing() {
    criterion("10 hamming error vs sample size", None, || {
        let d = 40usize;
        let seeds = 10u64;
        let mut medians = Vec::new();
        for &n in &[100usize, 200, 400] {
            let lambda = 1.8 * ((d as f64).ln() / n as f64).sqrt();
            let mut distances = Vec::new();
            for seed in 6000..6000 + seeds {
                let scenario =
                    SyntheticScenario::new(d, 5, n, GraphPattern::Banded { bandwidth: 1 }, seed);
                let generated = scenario.generate().map_err(|e| e.to_string())?;
                let inputs = DatasetCollection::new(generated.observation_matrices())
                    .map_err(|e| e.to_string())?;
                let cfg = PipelineConfig {
                    tie_policy: TiePolicy::Lexicographic,
                    ..PipelineConfig::new(
                        PipelineKind::Kendall,
                        generated.median_graph.edge_count(),
                        Tuning::FixedAll(lambda),
                    )
                };
                let out = run_pipeline(&inputs, &cfg).map_err(|e| e.to_string())?;
                distances.push(
                    out.median
                        .graph
                        .hamming_distance(&generated.median_graph)
                        .map_err(|e| e.to_string())?,
                );
            }
            distances.sort_unstable();
            let median = (distances[4] + distances[5]) as f64 / 2.0;
            medians.push((n, median));
        }
        for w in medians.windows(2) {
            if w[1].1 > w[0].1 {
                return Err(format!("median error grew: {medians:?}"));
            }
        }
        Ok(format!(
            "median hamming error {}",
            medians
                .iter()
                .map(|(n, m)| format!("n={n}: {m}"))
                .collect::<Vec<_>>()
                .join(", ")
        ))
    });
}
