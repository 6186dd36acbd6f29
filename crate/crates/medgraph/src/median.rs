//! Consensus aggregation: the s-sparse graph closest in total Hamming
//! distance to a collection of graphs.
//!
//! The minimizer has a closed form. Count, for every node pair, how many
//! input graphs carry that edge; the optimum keeps the `s` pairs with the
//! highest counts. The solution is unique exactly when no counts tie at the
//! rank-`s` boundary, so boundary ties are surfaced explicitly instead of
//! being resolved silently.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{upper_triangle_pairs, BinaryGraph};
use crate::io::JsonWriter;

/// Per-pair edge occurrence counts over a collection of `T` graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCountTable {
    dim: usize,
    num_graphs: usize,
    counts: BTreeMap<(usize, usize), u32>,
}

impl EdgeCountTable {
    /// Counts edge occurrences across the collection.
    pub fn from_graphs(graphs: &[BinaryGraph]) -> Result<Self> {
        let first = graphs.first().ok_or(Error::EmptyInput("graph list"))?;
        let dim = first.dim();
        let mut counts: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for g in graphs {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: g.dim(),
                    right: dim,
                });
            }
            for &pair in g.edges() {
                *counts.entry(pair).or_insert(0) += 1;
            }
        }
        Ok(EdgeCountTable {
            dim,
            num_graphs: graphs.len(),
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of graphs the counts were taken over.
    pub fn num_graphs(&self) -> usize {
        self.num_graphs
    }

    /// Occurrence count of an unordered pair; zero for absent pairs.
    pub fn count(&self, a: usize, b: usize) -> u32 {
        let pair = if a < b { (a, b) } else { (b, a) };
        self.counts.get(&pair).copied().unwrap_or(0)
    }

    /// Nonzero counts in lexicographic pair order.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.counts.iter().map(|(&p, &c)| (p, c))
    }
}

/// What to do when counts tie exactly at the rank-`s` boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Abort with the tied pair set; the minimizer is not unique.
    Error,
    /// Fill the boundary in lexicographic pair order and report the tie.
    Lexicographic,
}

/// An s-sparse consensus graph together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianResult {
    pub graph: BinaryGraph,
    pub s: usize,
    pub counts: EdgeCountTable,
    /// Pairs tied at the rank-s boundary; empty iff the optimum is unique.
    pub tie_report: Vec<(usize, usize)>,
    /// Hamming distance from `graph` to each input graph, in input order.
    pub per_dataset_distances: Vec<usize>,
}

impl MedianResult {
    /// Total Hamming objective attained by `graph`.
    pub fn objective(&self) -> usize {
        self.per_dataset_distances.iter().sum()
    }

    /// Serializes with fixed key order and 1-based indices:
    /// `{d, s, T, edges, zeta, ties, distances}`.
    pub fn to_json_string(&self) -> String {
        let mut w = JsonWriter::new();
        w.begin_object();
        w.key("d").uint(self.graph.dim() as u64);
        w.key("s").uint(self.s as u64);
        w.key("T").uint(self.counts.num_graphs() as u64);
        w.key("edges").begin_array();
        for &pair in self.graph.edges() {
            w.pair_one_based(pair);
        }
        w.end_array();
        w.key("zeta").begin_object();
        for ((j, k), count) in self.counts.iter_nonzero() {
            w.key(&format!("{},{}", j + 1, k + 1)).uint(count as u64);
        }
        w.end_object();
        w.key("ties").begin_array();
        for &pair in &self.tie_report {
            w.pair_one_based(pair);
        }
        w.end_array();
        w.key("distances").begin_array();
        for &d in &self.per_dataset_distances {
            w.uint(d as u64);
        }
        w.end_array();
        w.end_object();
        let mut out = w.finish();
        out.push('\n');
        out
    }
}

/// Edge occurrence counts of a graph collection.
pub fn edge_counts(graphs: &[BinaryGraph]) -> Result<EdgeCountTable> {
    EdgeCountTable::from_graphs(graphs)
}

/// Pairs ranked best-first for the median: count descending, then
/// lexicographic. Includes all `d(d-1)/2` pairs, zero counts last.
fn ranked_pairs(counts: &EdgeCountTable) -> Vec<((usize, usize), u32)> {
    let mut all: Vec<((usize, usize), u32)> = upper_triangle_pairs(counts.dim())
        .map(|p| (p, counts.count(p.0, p.1)))
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    all
}

/// Computes the s-sparse median graph by the top-count rule.
///
/// The returned graph always has exactly `s` edges. If counts tie exactly
/// at the boundary (the count at rank `s` equals the count at rank `s+1`),
/// the optimum is not unique and `tie_policy` decides between aborting and
/// lexicographic fill with a populated tie report.
pub fn sparse_median(
    graphs: &[BinaryGraph],
    s: usize,
    tie_policy: TiePolicy,
) -> Result<MedianResult> {
    let counts = EdgeCountTable::from_graphs(graphs)?;
    let dim = counts.dim();
    let max_edges = dim * (dim - 1) / 2;
    if s > max_edges {
        return Err(Error::InvalidSparsity { s, max: max_edges });
    }
    let ranked = ranked_pairs(&counts);

    let mut tie_report = Vec::new();
    if s > 0 && s < max_edges && ranked[s - 1].1 == ranked[s].1 {
        let boundary = ranked[s].1;
        tie_report = ranked
            .iter()
            .filter(|&&(_, c)| c == boundary)
            .map(|&(p, _)| p)
            .collect();
        if tie_policy == TiePolicy::Error {
            return Err(Error::TieAtRankS {
                s,
                tied: tie_report,
            });
        }
    }

    let graph = BinaryGraph::from_edges(dim, ranked[..s].iter().map(|&(p, _)| p))
        .expect("ranked pairs are valid edges");
    let per_dataset_distances = graphs
        .iter()
        .map(|g| graph.hamming_distance(g).expect("dims checked"))
        .collect();
    Ok(MedianResult {
        graph,
        s,
        counts,
        tie_report,
        per_dataset_distances,
    })
}

/// Budget on `d(d-1)/2` for [`verify_median_oracle`]'s exhaustive search.
pub const ORACLE_MAX_PAIRS: usize = 15;

/// Exhaustively checks that `candidate` attains the minimal total Hamming
/// distance among **all** graphs with exactly `s` edges. Enumeration only;
/// intended as an independent correctness oracle for small instances.
pub fn verify_median_oracle(
    graphs: &[BinaryGraph],
    s: usize,
    candidate: &BinaryGraph,
) -> Result<bool> {
    let first = graphs.first().ok_or(Error::EmptyInput("graph list"))?;
    let dim = first.dim();
    if candidate.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: candidate.dim(),
            right: dim,
        });
    }
    let pairs: Vec<(usize, usize)> = upper_triangle_pairs(dim).collect();
    if pairs.len() > ORACLE_MAX_PAIRS {
        return Err(Error::TooLarge {
            pairs: pairs.len(),
            max: ORACLE_MAX_PAIRS,
        });
    }
    if s > pairs.len() {
        return Err(Error::InvalidSparsity {
            s,
            max: pairs.len(),
        });
    }

    let objective =
        |g: &BinaryGraph| -> Result<usize> { graphs.iter().map(|t| g.hamming_distance(t)).sum() };

    let mut best = usize::MAX;
    let mut choose = (0..s).collect::<Vec<usize>>();
    loop {
        let subset = BinaryGraph::from_edges(dim, choose.iter().map(|&i| pairs[i]))
            .expect("pairs are valid");
        best = best.min(objective(&subset)?);
        // next s-combination of pairs, lexicographic
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(candidate.edge_count() == s && objective(candidate)? == best);
            }
            i -= 1;
            if choose[i] != i + pairs.len() - s {
                choose[i] += 1;
                for l in i + 1..s {
                    choose[l] = choose[l - 1] + 1;
                }
                break;
            }
        }
    }
}
