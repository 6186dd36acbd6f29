//! Undirected binary graphs stored as sorted edge sets.
//!
//! A graph on `d` nodes is the set of unordered node pairs that carry an
//! edge. Everything downstream (precision-matrix supports, consensus
//! aggregation, scoring) reduces to set operations on the upper triangle,
//! so edges are kept as a sorted `Vec<(usize, usize)>` with `j < k` rather
//! than as a dense adjacency matrix. Node indices are 0-based in the API;
//! all text formats are 1-based.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric 0/1 adjacency structure with an empty diagonal.
///
/// Edges are canonical: stored once with `j < k`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGraph {
    dim: usize,
    edges: Vec<(usize, usize)>,
}

impl BinaryGraph {
    /// The empty graph on `dim` nodes.
    pub fn empty(dim: usize) -> Self {
        BinaryGraph {
            dim,
            edges: Vec::new(),
        }
    }

    /// The complete graph on `dim` nodes.
    pub fn complete(dim: usize) -> Self {
        BinaryGraph {
            dim,
            edges: upper_triangle_pairs(dim).collect(),
        }
    }

    /// Builds a graph from unordered pairs. Pairs are normalized to `j < k`,
    /// sorted and deduplicated. Self-loops and out-of-range nodes are errors.
    pub fn from_edges(dim: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidPattern(format!(
                    "self-loop at node {}",
                    a + 1
                )));
            }
            let (j, k) = if a < b { (a, b) } else { (b, a) };
            if k >= dim {
                return Err(Error::DimensionMismatch {
                    left: k + 1,
                    right: dim,
                });
            }
            canon.push((j, k));
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(BinaryGraph { dim, edges: canon })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of edges; this is the Hamming "norm" of the graph.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted canonical edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        self.edges.binary_search(&pair).is_ok()
    }

    /// Number of upper-triangle entries where the two graphs disagree.
    ///
    /// This is a metric on the graphs of a fixed dimension.
    pub fn hamming_distance(&self, other: &BinaryGraph) -> Result<usize> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        // Both edge lists are sorted: count the symmetric difference by merging.
        let (mut i, mut j, mut dist) = (0, 0, 0);
        while i < self.edges.len() && j < other.edges.len() {
            match self.edges[i].cmp(&other.edges[j]) {
                std::cmp::Ordering::Less => {
                    dist += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    dist += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(dist + (self.edges.len() - i) + (other.edges.len() - j))
    }

    /// Graph whose edges are present in exactly one of the two inputs.
    pub fn symmetric_difference(&self, other: &BinaryGraph) -> Result<BinaryGraph> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut edges = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.edges.len() && j < other.edges.len() {
            match self.edges[i].cmp(&other.edges[j]) {
                std::cmp::Ordering::Less => {
                    edges.push(self.edges[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    edges.push(other.edges[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        edges.extend_from_slice(&self.edges[i..]);
        edges.extend_from_slice(&other.edges[j..]);
        Ok(BinaryGraph {
            dim: self.dim,
            edges,
        })
    }

    /// All upper-triangle pairs that are not edges, in lexicographic order.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        upper_triangle_pairs(self.dim)
            .filter(|p| self.edges.binary_search(p).is_err())
            .collect()
    }

    /// Relabels nodes: node `i` becomes `perm[i]`. `perm` must be a
    /// permutation of `0..dim`.
    pub fn relabel(&self, perm: &[usize]) -> Result<BinaryGraph> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: perm.len(),
                right: self.dim,
            });
        }
        let mut seen = vec![false; self.dim];
        for &p in perm {
            if p >= self.dim || seen[p] {
                return Err(Error::InvalidConfig("not a permutation".into()));
            }
            seen[p] = true;
        }
        BinaryGraph::from_edges(
            self.dim,
            self.edges.iter().map(|&(j, k)| (perm[j], perm[k])),
        )
    }

    /// Dense symmetric 0/1 adjacency matrix.
    pub fn to_adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for &(j, k) in &self.edges {
            a[(j, k)] = 1.0;
            a[(k, j)] = 1.0;
        }
        a
    }

    /// Serializes to the edge-list text format: a `# d=<dim> s=<edges>`
    /// header, then one `j k` line per edge with 1-based indices.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# d={} s={}", self.dim, self.edges.len());
        for &(j, k) in &self.edges {
            let _ = writeln!(out, "{} {}", j + 1, k + 1);
        }
        out
    }

    /// Parses the edge-list text format produced by [`to_edge_list_string`].
    ///
    /// [`to_edge_list_string`]: BinaryGraph::to_edge_list_string
    pub fn parse_edge_list(text: &str) -> Result<BinaryGraph> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: "<edge list>".into(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty edge list".into()))?;
        let header = header.trim();
        let rest = header
            .strip_prefix("# d=")
            .ok_or_else(|| parse_err(1, "expected `# d=<dim> s=<edges>` header".into()))?;
        let (dim_str, s_str) = rest
            .split_once(" s=")
            .ok_or_else(|| parse_err(1, "expected `# d=<dim> s=<edges>` header".into()))?;
        let dim: usize = dim_str
            .trim()
            .parse()
            .map_err(|_| parse_err(1, format!("bad dimension {dim_str:?}")))?;
        let declared: usize = s_str
            .trim()
            .parse()
            .map_err(|_| parse_err(1, format!("bad edge count {s_str:?}")))?;

        let mut edges = Vec::with_capacity(declared);
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let j: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(idx + 1, format!("bad edge line {line:?}")))?;
            let k: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(idx + 1, format!("bad edge line {line:?}")))?;
            if it.next().is_some() || j == 0 || k == 0 {
                return Err(parse_err(idx + 1, format!("bad edge line {line:?}")));
            }
            edges.push((j - 1, k - 1));
        }
        if edges.len() != declared {
            return Err(parse_err(
                1,
                format!("header declares {declared} edges, found {}", edges.len()),
            ));
        }
        BinaryGraph::from_edges(dim, edges)
    }
}

/// Iterates the `d(d-1)/2` unordered pairs `(j, k)` with `j < k` in
/// lexicographic order.
pub fn upper_triangle_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |j| (j + 1..dim).map(move |k| (j, k)))
}
