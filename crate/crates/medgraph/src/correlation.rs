//! Rank and product-moment correlation estimators.
//!
//! Kendall's tau is the workhorse: it only looks at the ordering of the
//! observations, so any strictly increasing distortion of the marginals
//! leaves it unchanged. The sine transform `sin(pi/2 * tau)` then converts
//! the tau matrix into a consistent estimate of the latent correlation
//! matrix of a Gaussian copula. The Pearson sample correlation is provided
//! as the baseline the rank pipeline is compared against.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::upper_triangle_pairs;
use crate::matrix::CorrelationMatrix;

/// Pairwise Kendall's tau values for the columns of one dataset.
///
/// Symmetric with a unit diagonal, entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallTauMatrix {
    dim: usize,
    taus: DMatrix<f64>,
}

impl KendallTauMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.taus
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.taus[(j, k)]
    }
}

/// Concordant-minus-discordant pair count, the exact integer numerator of
/// Kendall's tau. Pairs tied in either coordinate contribute zero.
///
/// Computed in `O(n log n)` by merge-sort inversion counting: sort by
/// `(x, y)`, count pair swaps while merge-sorting the `y` sequence, and
/// correct for tied groups. The result is exactly the same integer the
/// naive `O(n^2)` sum of `sign(dx) * sign(dy)` produces.
pub fn kendall_net_count(x: &[f64], y: &[f64]) -> Result<i64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Tied-pair bookkeeping over the (x, y)-sorted sequence.
    let mut tied_x: i64 = 0;
    let mut tied_xy: i64 = 0;
    let mut run_x: i64 = 1;
    let mut run_xy: i64 = 1;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            run_x = 1;
            tied_xy += run_xy * (run_xy - 1) / 2;
            run_xy = 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;
    tied_xy += run_xy * (run_xy - 1) / 2;

    // Strictly discordant pairs are exactly the inversions of the y sequence:
    // within an x-tied run the ys are already ascending and equal ys never
    // count as a swap, so ties contribute nothing here.
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scratch = ys.clone();
    let swaps = merge_count(&mut ys, &mut scratch);

    // Tied y pairs, from the now fully sorted y sequence.
    let mut tied_y: i64 = 0;
    let mut run_y: i64 = 1;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            tied_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    tied_y += run_y * (run_y - 1) / 2;

    let total = (n as i64) * (n as i64 - 1) / 2;
    Ok(total - tied_x - tied_y + tied_xy - 2 * swaps)
}

/// Bottom-up merge sort counting strict inversions.
fn merge_count(data: &mut [f64], scratch: &mut [f64]) -> i64 {
    let n = data.len();
    let mut swaps: i64 = 0;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut out) = (lo, mid, lo);
            while i < mid || j < hi {
                if i < mid && (j >= hi || data[i] <= data[j]) {
                    scratch[out] = data[i];
                    i += 1;
                } else {
                    scratch[out] = data[j];
                    j += 1;
                    swaps += (mid - i) as i64;
                }
                out += 1;
            }
            lo = hi;
        }
        data.copy_from_slice(scratch);
        width *= 2;
    }
    swaps
}

/// Kendall's tau between two equal-length samples, without tie correction:
/// the average of `sign(x_i - x_i') * sign(y_i - y_i')` over all pairs.
pub fn kendall_tau_pair(x: &[f64], y: &[f64]) -> Result<f64> {
    let net = kendall_net_count(x, y)?;
    let n = x.len() as i64;
    Ok(net as f64 / (n * (n - 1) / 2) as f64)
}

/// Pairwise tau for every column pair of an `n x d` observation matrix.
pub fn kendall_tau_matrix(data: &DMatrix<f64>) -> Result<KendallTauMatrix> {
    let (n, d) = data.shape();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| data.column(j).iter().copied().collect())
        .collect();
    let pairs: Vec<(usize, usize)> = upper_triangle_pairs(d).collect();
    let taus: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| kendall_tau_pair(&cols[j], &cols[k]).expect("validated above"))
        .collect();
    let mut m = DMatrix::identity(d, d);
    for (&(j, k), &t) in pairs.iter().zip(taus.iter()) {
        m[(j, k)] = t;
        m[(k, j)] = t;
    }
    Ok(KendallTauMatrix { dim: d, taus: m })
}

/// Entrywise `sin(pi/2 * tau)`, mapping a tau matrix to a correlation
/// matrix estimate. Fixes -1, 0 and 1, and keeps the diagonal exactly 1.
pub fn sine_transform(tau: &KendallTauMatrix) -> CorrelationMatrix {
    let d = tau.dim;
    let mut m = DMatrix::identity(d, d);
    for (j, k) in upper_triangle_pairs(d) {
        let v = (std::f64::consts::FRAC_PI_2 * tau.taus[(j, k)])
            .sin()
            .clamp(-1.0, 1.0);
        m[(j, k)] = v;
        m[(k, j)] = v;
    }
    CorrelationMatrix::from_matrix(m).expect("sine transform preserves invariants")
}

/// Pearson sample correlation matrix of an `n x d` observation matrix.
///
/// A column with zero sample variance makes the coefficient undefined and
/// is reported as an error identifying the 0-based column.
pub fn pearson_matrix(data: &DMatrix<f64>) -> Result<CorrelationMatrix> {
    let (n, d) = data.shape();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut sum_sq = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = data.column(j).iter().copied().collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let dev: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let ss: f64 = dev.iter().map(|v| v * v).sum();
        let scale = col
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1e-300);
        if ss.sqrt() <= f64::EPSILON * 16.0 * (n as f64).sqrt() * scale {
            return Err(Error::DegenerateColumn { column: j });
        }
        centered.push(dev);
        sum_sq.push(ss);
    }
    let mut m = DMatrix::identity(d, d);
    for (j, k) in upper_triangle_pairs(d) {
        let dot: f64 = centered[j]
            .iter()
            .zip(&centered[k])
            .map(|(a, b)| a * b)
            .sum();
        let r = (dot / (sum_sq[j] * sum_sq[k]).sqrt()).clamp(-1.0, 1.0);
        m[(j, k)] = r;
        m[(k, j)] = r;
    }
    Ok(CorrelationMatrix::from_matrix(m).expect("entries clamped"))
}
