//! Synthetic benchmark scenarios: a shared sparse truth graph, per-dataset
//! perturbed graphs and covariances, and Gaussian-copula samples.
//!
//! A scenario starts from one of five graph patterns. The pattern graph is
//! turned into a correlation matrix whose inverse has exactly that support.
//! Each dataset then gets its own graph (the truth plus a few random extra
//! edges), its own covariance (the shared one with the added pairs
//! overwritten by a fixed fill value, repaired back to a valid correlation
//! matrix), and finally `n` observations: latent Gaussian draws pushed
//! through the five cyclic marginal transforms.
//!
//! All randomness flows through named substreams derived from the scenario
//! seed, so dataset `t` is reproducible in isolation and adding datasets
//! never disturbs earlier ones.

mod transforms;

pub use transforms::{normal_cdf, npn_transform_inverse, validate_constants, NpnTransform};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{upper_triangle_pairs, BinaryGraph};
use crate::matrix::CorrelationMatrix;

/// Smallest eigenvalue allowed to survive the covariance repair step.
const EIGEN_FLOOR: f64 = 1e-3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic RNG substream keyed by `(seed, domain, index)`.
///
/// Streams for distinct keys are independent for all practical purposes, so
/// per-dataset work can run in parallel without sharing generator state.
pub fn substream(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut h = 0xcbf2_9ce4_8422_2325u64; // FNV-1a over the domain tag
    for b in domain.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut state = splitmix64(seed ^ h);
    state = splitmix64(state ^ index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// The five supported truth-graph shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphPattern {
    /// Edges between nodes at index distance `bandwidth` or less.
    Banded { bandwidth: usize },
    /// Contiguous groups; within-group pairs drawn independently.
    Clustered { groups: usize, within_prob: f64 },
    /// Contiguous blocks, the first node of each connected to the rest.
    Hub { hub_count: usize },
    /// Every pair drawn independently.
    Random { edge_prob: f64 },
    /// Preferential attachment, one edge per arriving node.
    ScaleFree,
}

impl GraphPattern {
    /// Name used in CLI flags and manifests.
    pub fn name(&self) -> &'static str {
        match self {
            GraphPattern::Banded { .. } => "banded",
            GraphPattern::Clustered { .. } => "clustered",
            GraphPattern::Hub { .. } => "hub",
            GraphPattern::Random { .. } => "random",
            GraphPattern::ScaleFree => "scale-free",
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::InvalidPattern(format!("need d >= 2, got {d}")));
        }
        match *self {
            GraphPattern::Banded { bandwidth } => {
                if bandwidth < 1 {
                    return Err(Error::InvalidPattern("bandwidth must be >= 1".into()));
                }
            }
            GraphPattern::Clustered {
                groups,
                within_prob,
            } => {
                if groups < 1 || groups > d {
                    return Err(Error::InvalidPattern(format!(
                        "groups = {groups} incompatible with d = {d}"
                    )));
                }
                if !(within_prob > 0.0 && within_prob <= 1.0) {
                    return Err(Error::InvalidPattern(format!(
                        "within_prob = {within_prob} outside (0, 1]"
                    )));
                }
            }
            GraphPattern::Hub { hub_count } => {
                if hub_count < 1 || hub_count > d {
                    return Err(Error::InvalidPattern(format!(
                        "hub_count = {hub_count} incompatible with d = {d}"
                    )));
                }
            }
            GraphPattern::Random { edge_prob } => {
                if !(edge_prob > 0.0 && edge_prob <= 1.0) {
                    return Err(Error::InvalidPattern(format!(
                        "edge_prob = {edge_prob} outside (0, 1]"
                    )));
                }
            }
            GraphPattern::ScaleFree => {}
        }
        Ok(())
    }

    /// Default parameters at dimension `d`, chosen so the five patterns
    /// land in comparable edge-count ranges.
    pub fn default_for(name: &str, d: usize) -> Result<GraphPattern> {
        match name {
            "banded" => Ok(GraphPattern::Banded { bandwidth: 1 }),
            "clustered" => Ok(GraphPattern::Clustered {
                groups: 5.min(d),
                within_prob: 0.3,
            }),
            "hub" => Ok(GraphPattern::Hub {
                hub_count: d.div_ceil(20).max(1),
            }),
            "random" => Ok(GraphPattern::Random {
                edge_prob: (3.0 / d as f64).min(1.0),
            }),
            "scale-free" | "scale_free" | "scalefree" => Ok(GraphPattern::ScaleFree),
            other => Err(Error::InvalidPattern(format!("unknown pattern {other:?}"))),
        }
    }
}

/// Splits `0..d` into `parts` contiguous blocks with sizes as equal as
/// possible (the first `d % parts` blocks get one extra node).
fn contiguous_blocks(d: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let base = d / parts;
    let extra = d % parts;
    let mut blocks = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        blocks.push(start..start + len);
        start += len;
    }
    blocks
}

/// Draws a truth graph of the given pattern on `d` nodes.
pub fn generate_pattern(
    pattern: &GraphPattern,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<BinaryGraph> {
    pattern.validate(d)?;
    let edges: Vec<(usize, usize)> = match *pattern {
        GraphPattern::Banded { bandwidth } => upper_triangle_pairs(d)
            .filter(|&(j, k)| k - j <= bandwidth)
            .collect(),
        GraphPattern::Clustered {
            groups,
            within_prob,
        } => {
            let mut edges = Vec::new();
            for block in contiguous_blocks(d, groups) {
                for j in block.clone() {
                    for k in j + 1..block.end {
                        if rng.random::<f64>() < within_prob {
                            edges.push((j, k));
                        }
                    }
                }
            }
            edges
        }
        GraphPattern::Hub { hub_count } => {
            let mut edges = Vec::new();
            for block in contiguous_blocks(d, hub_count) {
                let hub = block.start;
                for k in hub + 1..block.end {
                    edges.push((hub, k));
                }
            }
            edges
        }
        GraphPattern::Random { edge_prob } => upper_triangle_pairs(d)
            .filter(|_| rng.random::<f64>() < edge_prob)
            .collect(),
        GraphPattern::ScaleFree => {
            // start from a single edge; each arriving node attaches to one
            // existing node picked proportionally to degree
            let mut degree = vec![0usize; d];
            let mut edges = vec![(0usize, 1usize)];
            degree[0] = 1;
            degree[1] = 1;
            for node in 2..d {
                let total: usize = degree[..node].iter().sum();
                let mut ticket = rng.random_range(0..total);
                let mut target = 0;
                for (i, &deg) in degree[..node].iter().enumerate() {
                    if ticket < deg {
                        target = i;
                        break;
                    }
                    ticket -= deg;
                }
                edges.push((target, node));
                degree[target] += 1;
                degree[node] = 1;
            }
            edges
        }
    };
    BinaryGraph::from_edges(d, edges)
}

/// Builds a correlation matrix whose inverse is supported exactly on `g`.
///
/// The precision matrix is `off_value * A(g) + delta * I` with
/// `delta = |lambda_min(off_value * A(g))| + 0.1`, inverted and rescaled to
/// unit diagonal. The diagonal shift guarantees positive definiteness and
/// the rescaling preserves the support of the inverse.
pub fn covariance_from_graph(g: &BinaryGraph, off_value: f64) -> CorrelationMatrix {
    let d = g.dim();
    let scaled = g.to_adjacency() * off_value;
    let min_eig = scaled
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let delta = min_eig.abs() + 0.1;
    let omega = scaled + DMatrix::identity(d, d) * delta;
    let sigma = omega
        .cholesky()
        .expect("diagonal shift makes omega positive definite")
        .inverse();
    CorrelationMatrix::from_matrix(rescale_to_correlation(&sigma))
        .expect("rescaled inverse is a correlation matrix")
}

fn rescale_to_correlation(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    let inv_sd: Vec<f64> = (0..d).map(|j| 1.0 / m[(j, j)].sqrt()).collect();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            m[(i, j)] * inv_sd[i] * inv_sd[j]
        }
    })
}

/// A dataset-level model: the truth graph plus `k` extra edges, and the
/// matching covariance.
#[derive(Debug, Clone)]
pub struct PerturbedModel {
    pub graph: BinaryGraph,
    pub sigma: CorrelationMatrix,
    /// Largest eigenvalue adjustment the repair step applied (0 when the
    /// overwritten matrix was already acceptable).
    pub repair_shift: f64,
}

/// Adds `k` uniformly chosen non-edges to `base_graph` and overwrites the
/// corresponding covariance entries with `sigma_fill`, repairing the result
/// by eigenvalue clipping and rescaling if the overwrite broke positive
/// definiteness.
pub fn perturb_dataset_model(
    base_graph: &BinaryGraph,
    base_sigma: &CorrelationMatrix,
    k: usize,
    sigma_fill: f64,
    rng: &mut ChaCha8Rng,
) -> Result<PerturbedModel> {
    if base_graph.dim() != base_sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: base_graph.dim(),
            right: base_sigma.dim(),
        });
    }
    if k == 0 {
        return Ok(PerturbedModel {
            graph: base_graph.clone(),
            sigma: base_sigma.clone(),
            repair_shift: 0.0,
        });
    }
    let mut pool = base_graph.non_edges();
    if pool.len() < k {
        return Err(Error::InvalidPerturbation {
            requested: k,
            available: pool.len(),
        });
    }
    // partial Fisher-Yates: the first k slots become the chosen non-edges
    for i in 0..k {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let added = &pool[..k];

    let mut graph_edges: Vec<(usize, usize)> = base_graph.edges().to_vec();
    graph_edges.extend_from_slice(added);
    let graph = BinaryGraph::from_edges(base_graph.dim(), graph_edges)?;

    let mut sigma = base_sigma.values().clone();
    for &(j, kk) in added {
        sigma[(j, kk)] = sigma_fill;
        sigma[(kk, j)] = sigma_fill;
    }

    let eigen = sigma.clone().symmetric_eigen();
    let min_eig = eigen
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let (sigma, repair_shift) = if min_eig >= EIGEN_FLOOR {
        (sigma, 0.0)
    } else {
        let mut vals = eigen.eigenvalues.clone();
        let mut shift = 0.0f64;
        for v in vals.iter_mut() {
            if *v < EIGEN_FLOOR {
                shift = shift.max(EIGEN_FLOOR - *v);
                *v = EIGEN_FLOOR;
            }
        }
        let q = eigen.eigenvectors;
        let rebuilt = &q * DMatrix::from_diagonal(&vals) * q.transpose();
        // symmetrize rounding noise from the reconstruction
        let d = rebuilt.nrows();
        let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)]));
        (rescale_to_correlation(&sym), shift)
    };
    Ok(PerturbedModel {
        graph,
        sigma: CorrelationMatrix::from_matrix(sigma)?,
        repair_shift,
    })
}

/// Marginal behavior of sampled datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginals {
    /// Columns cycle through the five transforms.
    NpnCycle,
    /// All columns stay Gaussian.
    Gaussian,
}

impl Marginals {
    pub fn name(&self) -> &'static str {
        match self {
            Marginals::NpnCycle => "npn",
            Marginals::Gaussian => "gaussian",
        }
    }

    pub fn from_name(name: &str) -> Result<Marginals> {
        match name {
            "npn" => Ok(Marginals::NpnCycle),
            "gaussian" => Ok(Marginals::Gaussian),
            other => Err(Error::InvalidConfig(format!(
                "unknown marginals {other:?} (expected npn or gaussian)"
            ))),
        }
    }
}

/// Draws `n` latent Gaussian rows with covariance `sigma` via Cholesky.
pub fn sample_latent(
    sigma: &CorrelationMatrix,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DMatrix<f64>> {
    let d = sigma.dim();
    let chol = sigma
        .values()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let mut out = DMatrix::zeros(n, d);
    let mut eps = vec![0.0f64; d];
    for i in 0..n {
        for e in eps.iter_mut() {
            *e = rng.sample(rand_distr::StandardNormal);
        }
        for j in 0..d {
            // row j of L times eps; L is lower triangular
            let mut acc = 0.0;
            for (jj, &e) in eps.iter().enumerate().take(j + 1) {
                acc += l[(j, jj)] * e;
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Pushes latent Gaussian observations through the marginal transforms.
pub fn apply_marginals(latent: &DMatrix<f64>, marginals: Marginals) -> DMatrix<f64> {
    match marginals {
        Marginals::Gaussian => latent.clone(),
        Marginals::NpnCycle => {
            let (n, d) = latent.shape();
            DMatrix::from_fn(n, d, |i, j| {
                NpnTransform::for_column(j).inverse(latent[(i, j)])
            })
        }
    }
}

/// Samples one dataset: latent Gaussian rows pushed through the transforms.
pub fn sample_dataset(
    sigma: &CorrelationMatrix,
    n: usize,
    rng: &mut ChaCha8Rng,
    marginals: Marginals,
) -> Result<DMatrix<f64>> {
    transforms::ensure_constants_validated()?;
    let latent = sample_latent(sigma, n, rng)?;
    Ok(apply_marginals(&latent, marginals))
}

/// Full description of a synthetic benchmark scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub d: usize,
    /// Number of datasets.
    pub t_count: usize,
    /// Observations per dataset.
    pub n: usize,
    pub pattern: GraphPattern,
    /// Extra edges added to the truth graph for each dataset.
    pub perturb_edges: usize,
    /// Off-diagonal value used to build the precision matrix.
    pub off_value: f64,
    /// Covariance value written at the added pairs.
    pub sigma_fill: f64,
    pub marginals: Marginals,
    pub seed: u64,
}

impl SyntheticScenario {
    pub fn new(d: usize, t_count: usize, n: usize, pattern: GraphPattern, seed: u64) -> Self {
        SyntheticScenario {
            d,
            t_count,
            n,
            pattern,
            perturb_edges: 10,
            off_value: 0.3,
            sigma_fill: 0.1,
            marginals: Marginals::NpnCycle,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pattern.validate(self.d)?;
        if self.t_count == 0 {
            return Err(Error::EmptyInput("scenario needs at least one dataset"));
        }
        if self.n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.n,
            });
        }
        if !(self.sigma_fill > -1.0 && self.sigma_fill < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_fill = {} outside (-1, 1)",
                self.sigma_fill
            )));
        }
        if self.off_value == 0.0 || !self.off_value.is_finite() {
            return Err(Error::InvalidConfig("off_value must be nonzero".into()));
        }
        Ok(())
    }

    /// Generates the scenario: truth graph, per-dataset models and samples.
    ///
    /// Datasets are generated in parallel from independent substreams; the
    /// output is a pure function of the scenario definition.
    pub fn generate(&self) -> Result<GeneratedScenario> {
        self.validate()?;
        transforms::ensure_constants_validated()?;
        let mut pattern_rng = substream(self.seed, "pattern", 0);
        let median_graph = generate_pattern(&self.pattern, self.d, &mut pattern_rng)?;
        let base_sigma = covariance_from_graph(&median_graph, self.off_value);

        let datasets: Vec<Result<GeneratedDataset>> = (0..self.t_count)
            .into_par_iter()
            .map(|t| {
                let mut perturb_rng = substream(self.seed, "perturb", t as u64);
                let model = perturb_dataset_model(
                    &median_graph,
                    &base_sigma,
                    self.perturb_edges,
                    self.sigma_fill,
                    &mut perturb_rng,
                )?;
                let mut sample_rng = substream(self.seed, "sample", t as u64);
                let latent = sample_latent(&model.sigma, self.n, &mut sample_rng)?;
                let observations = apply_marginals(&latent, self.marginals);
                Ok(GeneratedDataset {
                    graph: model.graph,
                    sigma: model.sigma,
                    repair_shift: model.repair_shift,
                    latent,
                    observations,
                })
            })
            .collect();
        let datasets: Result<Vec<GeneratedDataset>> = datasets.into_iter().collect();
        Ok(GeneratedScenario {
            median_graph,
            base_sigma,
            datasets: datasets?,
        })
    }
}

/// One generated dataset with everything needed for scoring.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub graph: BinaryGraph,
    pub sigma: CorrelationMatrix,
    pub repair_shift: f64,
    /// Latent Gaussian draws, before the marginal transforms.
    pub latent: DMatrix<f64>,
    pub observations: DMatrix<f64>,
}

/// A fully materialized scenario.
#[derive(Debug, Clone)]
pub struct GeneratedScenario {
    pub median_graph: BinaryGraph,
    pub base_sigma: CorrelationMatrix,
    pub datasets: Vec<GeneratedDataset>,
}

impl GeneratedScenario {
    pub fn observation_matrices(&self) -> Vec<DMatrix<f64>> {
        self.datasets
            .iter()
            .map(|d| d.observations.clone())
            .collect()
    }
}
