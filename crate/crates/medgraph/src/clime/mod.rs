//! Constrained l1-minimization for inverse (correlation) matrix estimation,
//! CLIME-style (Cai, Liu and Luo, 2011).
//!
//! Each column of the concentration matrix is recovered independently:
//!
//! ```text
//!     minimize    ||beta||_1
//!     subject to  ||R beta - e_j||_inf <= lambda
//! ```
//!
//! which splits into positive and negative parts and becomes a linear
//! program with `2d` variables and `2d` inequality constraints. The raw
//! column solutions need not form a symmetric matrix; the final estimate
//! keeps, for every pair, the entry of smaller magnitude.

mod simplex;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{upper_triangle_pairs, BinaryGraph};
use crate::matrix::{ConcentrationEstimate, CorrelationMatrix};
use simplex::LpOutcome;

/// Tuning knobs for a CLIME solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimeConfig {
    /// Constraint width of the column programs.
    pub lambda: f64,
    /// Extra magnitude threshold applied when reading a graph off the
    /// estimate. Zero means "support at numerical resolution".
    pub gamma: f64,
    /// Slack accepted when verifying the constraint on returned columns.
    pub feasibility_tol: f64,
    /// Magnitudes at or below this count as zero.
    pub zero_tol: f64,
}

impl ClimeConfig {
    pub fn new(lambda: f64) -> Self {
        ClimeConfig {
            lambda,
            ..ClimeConfig::default()
        }
    }

    // negated comparisons so NaN fails validation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda = {} must be >= 0",
                self.lambda
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma = {} must be >= 0",
                self.gamma
            )));
        }
        if !(self.feasibility_tol > 0.0) || !(self.zero_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

impl Default for ClimeConfig {
    fn default() -> Self {
        ClimeConfig {
            lambda: 0.0,
            gamma: 0.0,
            feasibility_tol: 1e-8,
            zero_tol: 1e-8,
        }
    }
}

/// All column solutions before symmetrization, column `j` of `matrix` being
/// the solution for target `e_j`, plus the exact l1 objective of each.
#[derive(Debug, Clone)]
pub struct RawColumns {
    pub matrix: DMatrix<f64>,
    pub objectives: Vec<f64>,
}

/// Solves the single-column program for `e_j`.
pub fn clime_column(r: &CorrelationMatrix, j: usize, lambda: f64) -> Result<DVector<f64>> {
    let d = r.dim();
    if j >= d {
        return Err(Error::DimensionMismatch { left: j, right: d });
    }
    solve_column(r, j, lambda).map(|(beta, _)| beta)
}

fn solve_column(r: &CorrelationMatrix, j: usize, lambda: f64) -> Result<(DVector<f64>, f64)> {
    let d = r.dim();
    let rm = r.values();
    // variables [u; v] with beta = u - v, constraints
    //   R(u - v) <= lambda + e_j
    //  -R(u - v) <= lambda - e_j
    let mut a = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for row in 0..d {
        for col in 0..d {
            let v = rm[(row, col)];
            a[(row, col)] = v;
            a[(row, d + col)] = -v;
            a[(d + row, col)] = -v;
            a[(d + row, d + col)] = v;
        }
    }
    let mut b = vec![0.0; 2 * d];
    for row in 0..d {
        let e = if row == j { 1.0 } else { 0.0 };
        b[row] = lambda + e;
        b[d + row] = lambda - e;
    }
    let c = vec![1.0; 2 * d];
    match simplex::solve_min(&c, &a, &b) {
        LpOutcome::Optimal { x, objective } => {
            let beta = DVector::from_fn(d, |i, _| x[i] - x[d + i]);
            Ok((beta, objective))
        }
        LpOutcome::Infeasible => Err(Error::Infeasible { column: j, lambda }),
        LpOutcome::Unbounded => Err(Error::Internal(format!(
            "column {j} program reported unbounded; objective is bounded below"
        ))),
    }
}

/// Solves every column program. Columns are independent and solved in
/// parallel; results are assembled in column order so the output does not
/// depend on scheduling.
pub fn clime_columns(r: &CorrelationMatrix, lambda: f64) -> Result<RawColumns> {
    let d = r.dim();
    let solved: Vec<Result<(DVector<f64>, f64)>> = (0..d)
        .into_par_iter()
        .map(|j| solve_column(r, j, lambda))
        .collect();
    let mut matrix = DMatrix::zeros(d, d);
    let mut objectives = Vec::with_capacity(d);
    for (j, res) in solved.into_iter().enumerate() {
        let (beta, obj) = res?;
        matrix.set_column(j, &beta);
        objectives.push(obj);
    }
    Ok(RawColumns { matrix, objectives })
}

/// Full CLIME estimate: solve all columns, then symmetrize by keeping the
/// smaller-magnitude entry of each `(j,k)`/`(k,j)` pair (ties keep the
/// upper-triangle one).
pub fn clime_estimate(r: &CorrelationMatrix, cfg: &ClimeConfig) -> Result<ConcentrationEstimate> {
    cfg.validate()?;
    let raw = clime_columns(r, cfg.lambda)?;
    Ok(symmetrize(&raw.matrix, cfg.lambda))
}

/// Min-magnitude symmetrization of raw column solutions.
pub fn symmetrize(raw: &DMatrix<f64>, lambda: f64) -> ConcentrationEstimate {
    let d = raw.nrows();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        out[(j, j)] = raw[(j, j)];
    }
    for (j, k) in upper_triangle_pairs(d) {
        let upper = raw[(j, k)];
        let lower = raw[(k, j)];
        let v = if upper.abs() <= lower.abs() {
            upper
        } else {
            lower
        };
        out[(j, k)] = v;
        out[(k, j)] = v;
    }
    ConcentrationEstimate::new(out, lambda)
}

/// Reads the support off an estimate: edge `(j,k)` iff
/// `|omega_jk| > max(gamma, zero_tol)`.
pub fn graph_from_estimate(
    omega: &ConcentrationEstimate,
    gamma: f64,
    zero_tol: f64,
) -> BinaryGraph {
    let threshold = gamma.max(zero_tol);
    let d = omega.dim();
    let edges = upper_triangle_pairs(d).filter(|&(j, k)| omega.get(j, k).abs() > threshold);
    BinaryGraph::from_edges(d, edges).expect("upper triangle pairs are valid edges")
}

/// Largest violation of `||R * column_j - e_j||_inf <= lambda` across the
/// raw columns. Used to audit feasibility of a finished solve.
pub fn max_constraint_violation(r: &CorrelationMatrix, raw: &RawColumns, lambda: f64) -> f64 {
    let d = r.dim();
    let residual = r.values() * &raw.matrix;
    let mut worst = 0.0f64;
    for j in 0..d {
        for i in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((residual[(i, j)] - target).abs() - lambda);
        }
    }
    worst.max(0.0)
}
