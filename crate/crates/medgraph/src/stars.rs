//! Penalty selection by subsampling stability, after StARS
//! (Liu, Roeder and Wasserman, 2010).
//!
//! For each penalty on a descending grid, the graph is re-estimated on `N`
//! random subsamples. An edge that appears in a fraction `theta` of the
//! subsamples contributes instability `2 theta (1 - theta)`; the average
//! over all node pairs is the instability of that penalty. After
//! monotonizing (running max from the sparse end), the selected penalty is
//! the smallest one whose instability stays at or below the threshold:
//! the densest estimate that is still stable.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clime::{clime_estimate, graph_from_estimate, ClimeConfig};
use crate::correlation::{kendall_tau_matrix, pearson_matrix, sine_transform};
use crate::error::{Error, Result};
use crate::graph::upper_triangle_pairs;
use crate::matrix::CorrelationMatrix;

/// Which correlation estimator feeds the per-subsample solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Kendall,
    Pearson,
}

impl CorrelationKind {
    pub fn estimate(&self, data: &DMatrix<f64>) -> Result<CorrelationMatrix> {
        match self {
            CorrelationKind::Kendall => Ok(sine_transform(&kendall_tau_matrix(data)?)),
            CorrelationKind::Pearson => pearson_matrix(data),
        }
    }
}

/// Stability-selection settings.
#[derive(Debug, Clone, PartialEq)]
pub struct StarsConfig {
    /// Number of subsamples per grid point.
    pub subsamples: usize,
    /// Rows per subsample; `None` means `floor(10 sqrt(n))` capped at `n-1`.
    pub subsample_size: Option<usize>,
    /// Instability threshold.
    pub beta: f64,
    /// Strictly descending penalty grid.
    pub lambda_grid: Vec<f64>,
    /// Graph-reading knobs used for the per-subsample solves.
    pub gamma: f64,
    pub zero_tol: f64,
}

impl Default for StarsConfig {
    fn default() -> Self {
        StarsConfig {
            subsamples: 20,
            subsample_size: None,
            beta: 0.05,
            lambda_grid: default_lambda_grid(0.01, 1.0, 30),
            gamma: 0.0,
            zero_tol: 1e-8,
        }
    }
}

impl StarsConfig {
    // negated comparisons so NaN fails validation
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.subsamples < 2 {
            return Err(Error::InvalidConfig("need at least 2 subsamples".into()));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "beta = {} outside (0, 0.5)",
                self.beta
            )));
        }
        let b = self.resolve_subsample_size(n);
        if b < 2 || b >= n {
            return Err(Error::InvalidConfig(format!(
                "subsample size {b} incompatible with n = {n}"
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidConfig("empty penalty grid".into()));
        }
        for w in self.lambda_grid.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidConfig(
                    "penalty grid must be strictly descending".into(),
                ));
            }
        }
        if self.lambda_grid.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidConfig("penalties must be positive".into()));
        }
        Ok(())
    }

    pub fn resolve_subsample_size(&self, n: usize) -> usize {
        match self.subsample_size {
            Some(b) => b,
            None => ((10.0 * (n as f64).sqrt()).floor() as usize).min(n.saturating_sub(1)),
        }
    }
}

/// `count` log-spaced penalties from `max` down to `min`.
pub fn default_lambda_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min && count >= 2);
    let (lmin, lmax) = (min.ln(), max.ln());
    (0..count)
        .map(|i| (lmax - (lmax - lmin) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Instability of one penalty and its monotonized value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarsPathPoint {
    pub lambda: f64,
    pub instability: f64,
    pub monotone_instability: f64,
}

/// Outcome of a stability selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct StarsSelection {
    pub lambda: f64,
    /// False when no grid point met the threshold and the smallest penalty
    /// was returned as a fallback.
    pub stable: bool,
    /// The full instability path, in grid (descending penalty) order.
    pub path: Vec<StarsPathPoint>,
}

/// Selects a penalty for one dataset by subsampling stability.
///
/// Subsample index sets are drawn once from `rng` (without replacement) and
/// reused across the whole grid.
pub fn stars_select(
    data: &DMatrix<f64>,
    kind: CorrelationKind,
    cfg: &StarsConfig,
    rng: &mut ChaCha8Rng,
) -> Result<StarsSelection> {
    let n = data.nrows();
    let d = data.ncols();
    cfg.validate(n)?;
    let b = cfg.resolve_subsample_size(n);

    // draw all subsample index sets up front so rng use is independent of
    // the grid and of evaluation order
    let mut index_sets = Vec::with_capacity(cfg.subsamples);
    for _ in 0..cfg.subsamples {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..b {
            let j = rng.random_range(i..n);
            idx.swap(i, j);
        }
        let mut chosen = idx[..b].to_vec();
        chosen.sort_unstable();
        index_sets.push(chosen);
    }

    // one correlation matrix per subsample, reused for every grid point
    let correlations: Vec<Result<CorrelationMatrix>> = index_sets
        .par_iter()
        .map(|idx| {
            let sub = DMatrix::from_fn(b, d, |i, j| data[(idx[i], j)]);
            kind.estimate(&sub)
        })
        .collect();
    let correlations: Result<Vec<CorrelationMatrix>> = correlations.into_iter().collect();
    let correlations = correlations?;

    let pair_count = d * (d - 1) / 2;
    let instabilities: Vec<Result<f64>> = cfg
        .lambda_grid
        .par_iter()
        .map(|&lambda| {
            let clime_cfg = ClimeConfig {
                lambda,
                gamma: cfg.gamma,
                zero_tol: cfg.zero_tol,
                ..ClimeConfig::default()
            };
            let mut presence = vec![0u32; pair_count];
            for r in &correlations {
                let est = clime_estimate(r, &clime_cfg)?;
                let g = graph_from_estimate(&est, cfg.gamma, cfg.zero_tol);
                for (slot, (j, k)) in upper_triangle_pairs(d).enumerate() {
                    if g.has_edge(j, k) {
                        presence[slot] += 1;
                    }
                }
            }
            let m = cfg.subsamples as f64;
            let total: f64 = presence
                .iter()
                .map(|&c| {
                    let theta = c as f64 / m;
                    2.0 * theta * (1.0 - theta)
                })
                .sum();
            Ok(total / pair_count as f64)
        })
        .collect();
    let instabilities: Result<Vec<f64>> = instabilities.into_iter().collect();
    let instabilities = instabilities?;

    // monotonize from the sparse (large penalty) end
    let mut path = Vec::with_capacity(cfg.lambda_grid.len());
    let mut running_max = 0.0f64;
    for (&lambda, &raw) in cfg.lambda_grid.iter().zip(&instabilities) {
        running_max = running_max.max(raw);
        path.push(StarsPathPoint {
            lambda,
            instability: raw,
            monotone_instability: running_max,
        });
        debug_assert!(raw <= 0.5 + 1e-12);
    }

    // smallest penalty still within the threshold: the last grid point of
    // the leading stable stretch
    let selected = path
        .iter()
        .take_while(|p| p.monotone_instability <= cfg.beta)
        .last()
        .map(|p| p.lambda);
    match selected {
        Some(lambda) => Ok(StarsSelection {
            lambda,
            stable: true,
            path,
        }),
        None => Ok(StarsSelection {
            lambda: *cfg.lambda_grid.last().expect("validated non-empty"),
            stable: false,
            path,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::confusion;
    use crate::graph::BinaryGraph;
    use crate::synthetic::{substream, GraphPattern, Marginals, SyntheticScenario};

    #[test]
    fn grid_is_descending_log_spaced() {
        let grid = default_lambda_grid(0.01, 1.0, 30);
        assert_eq!(grid.len(), 30);
        assert!((grid[0] - 1.0).abs() < 1e-12);
        assert!((grid[29] - 0.01).abs() < 1e-12);
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn instability_formula_at_half() {
        // a pair present in half the subsamples contributes 2*.5*.5 = 0.5,
        // the maximum possible
        let theta: f64 = 0.5;
        assert_eq!(2.0 * theta * (1.0 - theta), 0.5);
    }

    #[test]
    fn config_validation() {
        let n = 100;
        assert!(StarsConfig::default().validate(n).is_ok());
        assert!(StarsConfig {
            subsamples: 1,
            ..Default::default()
        }
        .validate(n)
        .is_err());
        assert!(StarsConfig {
            beta: 0.0,
            ..Default::default()
        }
        .validate(n)
        .is_err());
        assert!(StarsConfig {
            subsample_size: Some(100),
            ..Default::default()
        }
        .validate(n)
        .is_err());
        assert!(StarsConfig {
            lambda_grid: vec![0.5, 0.5],
            ..Default::default()
        }
        .validate(n)
        .is_err());
        // default subsample size: floor(10 sqrt(n)) capped at n-1
        assert_eq!(StarsConfig::default().resolve_subsample_size(100), 99);
        assert_eq!(StarsConfig::default().resolve_subsample_size(400), 200);
    }

    #[test]
    fn strong_signal_selects_a_stable_penalty() {
        // two strongly dependent coordinates: the edge shows up in every
        // subsample over a wide penalty range, so instability is zero there
        let scenario = SyntheticScenario {
            perturb_edges: 0,
            marginals: Marginals::Gaussian,
            ..SyntheticScenario::new(4, 1, 300, GraphPattern::Banded { bandwidth: 1 }, 3)
        };
        let generated = scenario.generate().unwrap();
        let data = &generated.datasets[0].observations;
        let cfg = StarsConfig {
            subsamples: 10,
            lambda_grid: default_lambda_grid(0.05, 0.9, 12),
            ..Default::default()
        };
        let mut rng = substream(3, "stars", 0);
        let sel = stars_select(data, CorrelationKind::Pearson, &cfg, &mut rng).unwrap();
        assert!(sel.stable);
        // monotonized instability is nondecreasing along the descending grid
        for w in sel.path.windows(2) {
            assert!(w[1].monotone_instability >= w[0].monotone_instability - 1e-15);
        }
        // every instability is within the attainable range
        for p in &sel.path {
            assert!(p.instability >= 0.0 && p.instability <= 0.5);
        }
        // the selected penalty sits strictly inside the grid's stable prefix
        let at_selected = sel
            .path
            .iter()
            .find(|p| p.lambda == sel.lambda)
            .expect("selected penalty on grid");
        assert!(at_selected.monotone_instability <= cfg.beta);
    }

    #[test]
    fn selection_is_deterministic_under_seed() {
        let scenario = SyntheticScenario::new(6, 1, 120, GraphPattern::Banded { bandwidth: 1 }, 9);
        let data = scenario.generate().unwrap().datasets[0]
            .observations
            .clone();
        let cfg = StarsConfig {
            subsamples: 6,
            lambda_grid: default_lambda_grid(0.05, 0.8, 8),
            ..Default::default()
        };
        let a = stars_select(
            &data,
            CorrelationKind::Kendall,
            &cfg,
            &mut substream(4, "s", 0),
        )
        .unwrap();
        let b = stars_select(
            &data,
            CorrelationKind::Kendall,
            &cfg,
            &mut substream(4, "s", 0),
        )
        .unwrap();
        assert_eq!(a, b);
        let c = stars_select(
            &data,
            CorrelationKind::Kendall,
            &cfg,
            &mut substream(5, "s", 0),
        )
        .unwrap();
        // different seed may or may not move the selection, but the path
        // must still be a valid instability path
        assert_eq!(c.path.len(), 8);
    }

    /// Selected penalty recovers a decent graph on an easy Gaussian banded
    /// problem. The median F1 across seeds was 1.0 when this test was
    /// written; the assertion leaves a 0.1 margin below that pin and also
    /// enforces the 0.7 floor that motivated the check.
    #[test]
    fn banded_recovery_f1_with_selected_penalty() {
        let d = 20;
        let n = 200;
        let mut f1s = Vec::new();
        for seed in 0..10u64 {
            let scenario = SyntheticScenario {
                perturb_edges: 0,
                marginals: Marginals::Gaussian,
                ..SyntheticScenario::new(d, 1, n, GraphPattern::Banded { bandwidth: 1 }, 100 + seed)
            };
            let generated = scenario.generate().unwrap();
            let data = &generated.datasets[0].observations;
            let cfg = StarsConfig {
                subsamples: 10,
                lambda_grid: default_lambda_grid(0.05, 1.0, 15),
                ..Default::default()
            };
            let mut rng = substream(100 + seed, "stars", 0);
            let sel = stars_select(data, CorrelationKind::Pearson, &cfg, &mut rng).unwrap();
            let r = CorrelationKind::Pearson.estimate(data).unwrap();
            let est = clime_estimate(&r, &ClimeConfig::new(sel.lambda)).unwrap();
            let g = graph_from_estimate(&est, 0.0, 1e-8);
            let truth: BinaryGraph = generated.median_graph.clone();
            let c = confusion(&g, &truth).unwrap();
            f1s.push(c.f1());
        }
        f1s.sort_by(f64::total_cmp);
        let median = 0.5 * (f1s[4] + f1s[5]);
        assert!(
            median >= 0.7,
            "median F1 {median} below floor; path {f1s:?}"
        );
        assert!(
            median >= 0.9,
            "median F1 {median} fell more than 0.1 below the 1.0 pin"
        );
    }
}
