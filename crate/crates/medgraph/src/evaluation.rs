//! Scoring estimated graphs against a known truth: confusion counts, ROC
//! sweeps over the sparsity axis, and edge-difference summary tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{upper_triangle_pairs, BinaryGraph};
use crate::io::fmt_f64;
use crate::median::EdgeCountTable;

/// Upper-triangle support-recovery counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn tpr(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn fpr(&self) -> f64 {
        if self.fp + self.tn == 0 {
            0.0
        } else {
            self.fp as f64 / (self.fp + self.tn) as f64
        }
    }

    pub fn f1(&self) -> f64 {
        if 2 * self.tp + self.fp + self.fn_ == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / (2 * self.tp + self.fp + self.fn_) as f64
        }
    }
}

/// Counts agreement between an estimated and a true edge set.
pub fn confusion(estimate: &BinaryGraph, truth: &BinaryGraph) -> Result<Confusion> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            left: estimate.dim(),
            right: truth.dim(),
        });
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (j, k) in upper_triangle_pairs(estimate.dim()) {
        match (estimate.has_edge(j, k), truth.has_edge(j, k)) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// A total best-first order over all node pairs, from which the top-`s`
/// graph at any sparsity can be read off.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRanking {
    dim: usize,
    pairs: Vec<(usize, usize)>,
}

impl EdgeRanking {
    /// Ranks all pairs by `(primary desc, secondary desc, pair lex asc)`.
    pub fn from_scores(dim: usize, score: impl Fn(usize, usize) -> (f64, f64)) -> EdgeRanking {
        let mut scored: Vec<((usize, usize), (f64, f64))> = upper_triangle_pairs(dim)
            .map(|p| (p, score(p.0, p.1)))
            .collect();
        scored.sort_by(|a, b| {
            b.1 .0
                .total_cmp(&a.1 .0)
                .then(b.1 .1.total_cmp(&a.1 .1))
                .then(a.0.cmp(&b.0))
        });
        EdgeRanking {
            dim,
            pairs: scored.into_iter().map(|(p, _)| p).collect(),
        }
    }

    /// Ranks by occurrence count with a continuous tie-break score.
    pub fn from_counts(
        counts: &EdgeCountTable,
        tiebreak: impl Fn(usize, usize) -> f64,
    ) -> EdgeRanking {
        EdgeRanking::from_scores(counts.dim(), |j, k| {
            (counts.count(j, k) as f64, tiebreak(j, k))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All pairs, best first.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The graph keeping the `s` best-ranked pairs.
    pub fn top_graph(&self, s: usize) -> Result<BinaryGraph> {
        if s > self.pairs.len() {
            return Err(Error::InvalidSparsity {
                s,
                max: self.pairs.len(),
            });
        }
        BinaryGraph::from_edges(self.dim, self.pairs[..s].iter().copied())
    }
}

/// One point of an ROC curve, tagged with the sparsity that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub s: usize,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve over a sparsity sweep, with trapezoidal area.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweeps sparsity values over a ranking and scores each top-`s` graph
/// against the truth. The area is the trapezoidal integral of the points
/// (sorted by rate) augmented with the `(0,0)` and `(1,1)` corners.
pub fn roc_sweep(
    ranking: &EdgeRanking,
    truth: &BinaryGraph,
    s_values: &[usize],
) -> Result<RocCurve> {
    if ranking.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            left: ranking.dim(),
            right: truth.dim(),
        });
    }
    let total = ranking.pairs().len();
    let positives = truth.edge_count();
    let negatives = total - positives;
    // prefix true-positive counts along the ranking
    let mut tp_prefix = Vec::with_capacity(total + 1);
    tp_prefix.push(0usize);
    let mut tp = 0usize;
    for &(j, k) in ranking.pairs() {
        if truth.has_edge(j, k) {
            tp += 1;
        }
        tp_prefix.push(tp);
    }
    let mut points = Vec::with_capacity(s_values.len());
    let mut sorted_s = s_values.to_vec();
    sorted_s.sort_unstable();
    for &s in &sorted_s {
        if s > total {
            return Err(Error::InvalidSparsity { s, max: total });
        }
        let tp = tp_prefix[s];
        let fp = s - tp;
        let tpr = if positives == 0 {
            0.0
        } else {
            tp as f64 / positives as f64
        };
        let fpr = if negatives == 0 {
            0.0
        } else {
            fp as f64 / negatives as f64
        };
        points.push(RocPoint { s, fpr, tpr });
    }
    let auc = trapezoid_auc(&points);
    Ok(RocCurve { points, auc })
}

/// Convenience sweep over every sparsity `0..=d(d-1)/2`.
pub fn roc_sweep_full(ranking: &EdgeRanking, truth: &BinaryGraph) -> Result<RocCurve> {
    let all: Vec<usize> = (0..=ranking.pairs().len()).collect();
    roc_sweep(ranking, truth, &all)
}

fn trapezoid_auc(points: &[RocPoint]) -> f64 {
    let mut rates: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    rates.push((0.0, 0.0));
    rates.push((1.0, 1.0));
    rates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut auc = 0.0;
    for w in rates.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        auc += (x1 - x0) * (y0 + y1) * 0.5;
    }
    auc
}

/// Serializes an ROC curve as `s,fpr,tpr` CSV with a trailing area comment.
pub fn roc_to_csv(curve: &RocCurve) -> String {
    let mut out = String::from("s,fpr,tpr\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.s, fmt_f64(p.fpr), fmt_f64(p.tpr));
    }
    let _ = writeln!(out, "# auc={}", fmt_f64(curve.auc));
    out
}

/// Edge-difference summary between two labeled graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSummary {
    pub label1: String,
    pub label2: String,
    pub edges1: usize,
    pub edges2: usize,
    pub only_in_1: usize,
    pub only_in_2: usize,
}

/// Compares two graphs: total edges of each and edges unique to each side.
pub fn diff_summary(
    g1: &BinaryGraph,
    label1: &str,
    g2: &BinaryGraph,
    label2: &str,
) -> Result<DiffSummary> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            left: g1.dim(),
            right: g2.dim(),
        });
    }
    let shared = g1
        .edges()
        .iter()
        .filter(|&&(j, k)| g2.has_edge(j, k))
        .count();
    Ok(DiffSummary {
        label1: label1.to_string(),
        label2: label2.to_string(),
        edges1: g1.edge_count(),
        edges2: g2.edge_count(),
        only_in_1: g1.edge_count() - shared,
        only_in_2: g2.edge_count() - shared,
    })
}

impl DiffSummary {
    /// Aligned four-column table: `L1 | L2 | L1>L2 | L1<L2`.
    pub fn to_table_string(&self) -> String {
        let headers = [
            self.label1.clone(),
            self.label2.clone(),
            format!("{}>{}", self.label1, self.label2),
            format!("{}<{}", self.label1, self.label2),
        ];
        let values = [
            self.edges1.to_string(),
            self.edges2.to_string(),
            self.only_in_1.to_string(),
            self.only_in_2.to_string(),
        ];
        let widths: Vec<usize> = headers
            .iter()
            .zip(&values)
            .map(|(h, v)| h.len().max(v.len()))
            .collect();
        let mut out = String::new();
        for row in [&headers, &values] {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                if i + 1 == row.len() {
                    out.push_str(cell); // no trailing padding
                } else {
                    let _ = write!(out, "{:<width$}", cell, width = widths[i]);
                }
            }
            out.push('\n');
        }
        out
    }
}
