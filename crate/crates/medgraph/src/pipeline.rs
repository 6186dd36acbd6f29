//! The three end-to-end estimation pipelines.
//!
//! `Kendall` is the rank-based two-step procedure: per dataset, tau matrix,
//! sine transform, CLIME, support; then the s-sparse consensus of the
//! per-dataset graphs. `Pearson` swaps the rank correlation for the sample
//! correlation. `Np` is the naive baseline that pools every observation
//! row into one dataset before estimating a single graph.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::clime::{clime_estimate, graph_from_estimate, ClimeConfig};
use crate::error::{Error, Result};
use crate::evaluation::EdgeRanking;
use crate::graph::BinaryGraph;
use crate::matrix::DatasetCollection;
use crate::median::{EdgeCountTable, MedianResult, TiePolicy};
use crate::stars::{stars_select, CorrelationKind, StarsConfig};
use crate::synthetic::substream;

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineKind {
    /// Pool all rows, estimate once with the sample correlation.
    Np,
    /// Per-dataset sample correlation, then consensus.
    Pearson,
    /// Per-dataset rank correlation, then consensus.
    Kendall,
}

impl PipelineKind {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineKind::Np => "np",
            PipelineKind::Pearson => "pearson",
            PipelineKind::Kendall => "kendall",
        }
    }

    pub fn from_name(name: &str) -> Result<PipelineKind> {
        match name {
            "np" => Ok(PipelineKind::Np),
            "pearson" => Ok(PipelineKind::Pearson),
            "kendall" => Ok(PipelineKind::Kendall),
            other => Err(Error::InvalidConfig(format!(
                "unknown pipeline {other:?} (expected np, pearson or kendall)"
            ))),
        }
    }

    fn correlation_kind(&self) -> CorrelationKind {
        match self {
            PipelineKind::Kendall => CorrelationKind::Kendall,
            _ => CorrelationKind::Pearson,
        }
    }
}

/// How the per-dataset penalty is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Tuning {
    /// One penalty applied to every dataset.
    FixedAll(f64),
    /// One penalty per dataset, in dataset order.
    FixedPer(Vec<f64>),
    /// Stability selection per dataset.
    Stars(StarsConfig),
}

/// How the consensus sparsity is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityRule {
    /// Keep exactly `s` edges: the estimator proper.
    Exact(usize),
    /// Keep every pair present in at least `c` of the estimated graphs.
    /// A convenience mode, not the fixed-sparsity estimator; the boundary
    /// cannot tie under this rule, so no tie policy applies.
    MinCount(u32),
}

/// Everything a pipeline run needs besides the data.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub kind: PipelineKind,
    /// Sparsity of the final consensus graph.
    pub sparsity: SparsityRule,
    pub tuning: Tuning,
    pub gamma: f64,
    pub zero_tol: f64,
    pub tie_policy: TiePolicy,
    /// Seeds the stability-selection subsampling substreams.
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(kind: PipelineKind, s: usize, tuning: Tuning) -> Self {
        PipelineConfig {
            kind,
            sparsity: SparsityRule::Exact(s),
            tuning,
            gamma: 0.0,
            zero_tol: 1e-8,
            tie_policy: TiePolicy::Error,
            seed: 0,
        }
    }
}

/// Output of one pipeline run: the consensus result plus the intermediate
/// objects needed for scoring and reporting.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub median: MedianResult,
    /// Best-first ranking of all pairs (count-then-magnitude for the
    /// consensus pipelines, magnitude for the pooled one).
    pub ranking: EdgeRanking,
    /// Penalty used for each solve (one entry for the pooled pipeline).
    pub lambdas: Vec<f64>,
    /// Per-solve stability flags when tuning ran; `None` under fixed
    /// penalties.
    pub stars_stable: Option<Vec<bool>>,
    pub per_dataset_graphs: Vec<BinaryGraph>,
}

fn resolve_lambdas(
    datasets: &[DMatrix<f64>],
    kind: CorrelationKind,
    tuning: &Tuning,
    seed: u64,
) -> Result<(Vec<f64>, Option<Vec<bool>>)> {
    match tuning {
        Tuning::FixedAll(lambda) => Ok((vec![*lambda; datasets.len()], None)),
        Tuning::FixedPer(lambdas) => {
            if lambdas.len() != datasets.len() {
                return Err(Error::DimensionMismatch {
                    left: lambdas.len(),
                    right: datasets.len(),
                });
            }
            Ok((lambdas.clone(), None))
        }
        Tuning::Stars(cfg) => {
            let selections: Vec<Result<(f64, bool)>> = datasets
                .par_iter()
                .enumerate()
                .map(|(t, data)| {
                    let mut rng = substream(seed, "stars", t as u64);
                    let sel = stars_select(data, kind, cfg, &mut rng)
                        .map_err(|e| Error::in_dataset(t, e))?;
                    Ok((sel.lambda, sel.stable))
                })
                .collect();
            let mut lambdas = Vec::with_capacity(datasets.len());
            let mut stables = Vec::with_capacity(datasets.len());
            for sel in selections {
                let (l, st) = sel?;
                lambdas.push(l);
                stables.push(st);
            }
            Ok((lambdas, Some(stables)))
        }
    }
}

/// Runs one pipeline over a dataset collection.
pub fn run_pipeline(inputs: &DatasetCollection, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let d = inputs.dim();
    let max_edges = d * (d - 1) / 2;
    if let SparsityRule::Exact(s) = cfg.sparsity {
        if s > max_edges {
            return Err(Error::InvalidSparsity { s, max: max_edges });
        }
    }
    match cfg.kind {
        PipelineKind::Np => run_pooled(inputs, cfg),
        PipelineKind::Pearson | PipelineKind::Kendall => run_consensus(inputs, cfg),
    }
}

/// Resolves the sparsity rule against an occurrence-count table.
fn resolve_sparsity(rule: SparsityRule, counts: &EdgeCountTable) -> usize {
    match rule {
        SparsityRule::Exact(s) => s,
        SparsityRule::MinCount(c) => crate::graph::upper_triangle_pairs(counts.dim())
            .filter(|&(j, k)| counts.count(j, k) >= c)
            .count(),
    }
}

fn clime_config(cfg: &PipelineConfig, lambda: f64) -> ClimeConfig {
    ClimeConfig {
        lambda,
        gamma: cfg.gamma,
        zero_tol: cfg.zero_tol,
        ..ClimeConfig::default()
    }
}

fn run_consensus(inputs: &DatasetCollection, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let d = inputs.dim();
    let corr_kind = cfg.kind.correlation_kind();
    let (lambdas, stars_stable) =
        resolve_lambdas(inputs.datasets(), corr_kind, &cfg.tuning, cfg.seed)?;

    let solves: Vec<Result<(BinaryGraph, DMatrix<f64>)>> = inputs
        .datasets()
        .par_iter()
        .zip(lambdas.par_iter())
        .enumerate()
        .map(|(t, (data, &lambda))| {
            let solve = || -> Result<(BinaryGraph, DMatrix<f64>)> {
                let r = corr_kind.estimate(data)?;
                let est = clime_estimate(&r, &clime_config(cfg, lambda))?;
                let graph = graph_from_estimate(&est, cfg.gamma, cfg.zero_tol);
                Ok((graph, est.values().clone()))
            };
            solve().map_err(|e| Error::in_dataset(t, e))
        })
        .collect();

    let mut graphs = Vec::with_capacity(inputs.len());
    let mut abs_sum = DMatrix::<f64>::zeros(d, d);
    for solve in solves {
        let (graph, omega) = solve?;
        graphs.push(graph);
        abs_sum += omega.abs();
    }
    let t = inputs.len() as f64;
    let mean_abs = abs_sum / t;

    let counts = EdgeCountTable::from_graphs(&graphs)?;
    let ranking = EdgeRanking::from_counts(&counts, |j, k| mean_abs[(j, k)]);
    let s = resolve_sparsity(cfg.sparsity, &counts);

    // Count ties at the rank-s boundary break identifiability of the
    // count-based optimum. Strict mode aborts; otherwise the boundary is
    // filled in ranking order (mean concentration magnitude, then pair
    // order) and the tie is reported. Under the min-count rule the
    // boundary sits at a count change, so no tie is possible.
    let mut tie_report = Vec::new();
    let max_edges = d * (d - 1) / 2;
    if s > 0 && s < max_edges {
        let by_count = {
            let mut pairs: Vec<((usize, usize), u32)> = crate::graph::upper_triangle_pairs(d)
                .map(|p| (p, counts.count(p.0, p.1)))
                .collect();
            pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            pairs
        };
        if by_count[s - 1].1 == by_count[s].1 {
            let boundary = by_count[s].1;
            tie_report = by_count
                .iter()
                .filter(|&&(_, c)| c == boundary)
                .map(|&(p, _)| p)
                .collect();
            if cfg.tie_policy == TiePolicy::Error {
                return Err(Error::TieAtRankS {
                    s,
                    tied: tie_report,
                });
            }
        }
    }

    let graph = ranking.top_graph(s)?;
    let per_dataset_distances: Vec<usize> = graphs
        .iter()
        .map(|g| graph.hamming_distance(g).expect("dims equal"))
        .collect();
    let median = MedianResult {
        graph,
        s,
        counts,
        tie_report,
        per_dataset_distances,
    };
    Ok(PipelineOutput {
        median,
        ranking,
        lambdas,
        stars_stable,
        per_dataset_graphs: graphs,
    })
}

fn run_pooled(inputs: &DatasetCollection, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let pooled = inputs.pooled();
    let (lambdas, stars_stable) = resolve_lambdas(
        std::slice::from_ref(&pooled),
        CorrelationKind::Pearson,
        &cfg.tuning,
        cfg.seed,
    )?;
    let lambda = lambdas[0];
    let r = CorrelationKind::Pearson.estimate(&pooled)?;
    let est = clime_estimate(&r, &clime_config(cfg, lambda))?;
    let pooled_graph = graph_from_estimate(&est, cfg.gamma, cfg.zero_tol);

    // the pooled estimate has no occurrence counts to rank by; order pairs
    // by the magnitude of the estimated concentration entries
    let omega = est.values();
    let ranking = EdgeRanking::from_scores(inputs.dim(), |j, k| (omega[(j, k)].abs(), 0.0));
    let counts = EdgeCountTable::from_graphs(std::slice::from_ref(&pooled_graph))?;
    let s = resolve_sparsity(cfg.sparsity, &counts);
    let graph = ranking.top_graph(s)?;

    let per_dataset_distances = vec![graph.hamming_distance(&pooled_graph)?];
    let median = MedianResult {
        graph,
        s,
        counts,
        tie_report: Vec::new(),
        per_dataset_distances,
    };
    Ok(PipelineOutput {
        median,
        ranking,
        lambdas,
        stars_stable,
        per_dataset_graphs: vec![pooled_graph],
    })
}
