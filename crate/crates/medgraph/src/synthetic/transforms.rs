//! The five marginal transforms used by the synthetic generator.
//!
//! A sampled latent Gaussian coordinate `z` is pushed through one of five
//! inverse transforms, chosen cyclically by column index. Each is strictly
//! increasing and normalized so the transformed marginal keeps mean 0 and
//! variance 1; the normalizing constants are Gaussian moments with closed
//! forms, and [`validate_constants`] cross-checks every one of them against
//! adaptive quadrature before the first sample is drawn.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Standard normal density.
fn phi(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// sqrt(E|Z|) = (2/pi)^(1/4); normalizes the signed square root.
fn c_sqrt() -> f64 {
    (2.0 / PI).sqrt().sqrt()
}

/// sd of Phi(Z) ~ U(0,1): sqrt(1/12).
fn c_cdf() -> f64 {
    (1.0f64 / 12.0).sqrt()
}

/// sqrt(E Z^6) = sqrt(15); normalizes the cube.
fn c_cube() -> f64 {
    15.0f64.sqrt()
}

/// E e^Z = e^(1/2); centers the exponential.
fn c_exp_mean() -> f64 {
    E.sqrt()
}

/// sd of e^Z: sqrt(e^2 - e).
fn c_exp_sd() -> f64 {
    (E * E - E).sqrt()
}

/// One of the five marginal distortions, identified by its 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpnTransform {
    Identity,
    SignedSqrt,
    GaussianCdf,
    Cube,
    Exp,
}

impl NpnTransform {
    /// Transform applied to latent column `col` (0-based): the five cycle
    /// with period 5, so columns 0, 5, 10, ... stay Gaussian.
    pub fn for_column(col: usize) -> NpnTransform {
        NpnTransform::from_index(col % 5 + 1).expect("index in 1..=5")
    }

    pub fn from_index(k: usize) -> Option<NpnTransform> {
        match k {
            1 => Some(NpnTransform::Identity),
            2 => Some(NpnTransform::SignedSqrt),
            3 => Some(NpnTransform::GaussianCdf),
            4 => Some(NpnTransform::Cube),
            5 => Some(NpnTransform::Exp),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            NpnTransform::Identity => 1,
            NpnTransform::SignedSqrt => 2,
            NpnTransform::GaussianCdf => 3,
            NpnTransform::Cube => 4,
            NpnTransform::Exp => 5,
        }
    }

    /// Maps a latent Gaussian value to the observed scale. Strictly
    /// increasing; the observed marginal has mean 0 and variance 1.
    pub fn inverse(self, x: f64) -> f64 {
        match self {
            NpnTransform::Identity => x,
            NpnTransform::SignedSqrt => x.signum() * x.abs().sqrt() / c_sqrt(),
            NpnTransform::GaussianCdf => (normal_cdf(x) - 0.5) / c_cdf(),
            NpnTransform::Cube => x * x * x / c_cube(),
            NpnTransform::Exp => (x.exp() - c_exp_mean()) / c_exp_sd(),
        }
    }
}

/// Inverse transform `k` (1-based) applied to `x`.
///
/// Panics if `k` is outside `1..=5`; each transform itself is total.
pub fn npn_transform_inverse(k: usize, x: f64) -> f64 {
    NpnTransform::from_index(k)
        .unwrap_or_else(|| panic!("transform index {k} outside 1..=5"))
        .inverse(x)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Integration window: the integrands decay like exp(-t^2/2) (times at most
/// e^2t), so mass outside [-12, 12] is far below the checked tolerance.
const QUAD_RANGE: f64 = 12.0;
const QUAD_TOL: f64 = 1e-12;

fn gauss_integral(f: impl Fn(f64) -> f64) -> f64 {
    let integrand = |t: f64| f(t) * phi(t);
    adaptive_simpson(&integrand, -QUAD_RANGE, QUAD_RANGE, QUAD_TOL)
}

/// Cross-checks every closed-form normalizing constant against quadrature
/// of its defining integral, to absolute tolerance `tol`.
pub fn validate_constants(tol: f64) -> Result<()> {
    let checks: [(&str, f64, f64); 5] = [
        ("E|Z|", gauss_integral(f64::abs), c_sqrt().powi(2)),
        (
            "Var Phi(Z)",
            gauss_integral(|t| (normal_cdf(t) - 0.5).powi(2)),
            c_cdf().powi(2),
        ),
        ("E Z^6", gauss_integral(|t| t.powi(6)), c_cube().powi(2)),
        ("E e^Z", gauss_integral(f64::exp), c_exp_mean()),
        (
            "Var e^Z",
            gauss_integral(|t| (t.exp() - c_exp_mean()).powi(2)),
            c_exp_sd().powi(2),
        ),
    ];
    // E Phi(Z) = 1/2 justifies centering the CDF transform at 1/2.
    let mean_cdf = gauss_integral(normal_cdf);
    if (mean_cdf - 0.5).abs() > tol {
        return Err(Error::Internal(format!(
            "E Phi(Z) quadrature {mean_cdf} disagrees with 1/2"
        )));
    }
    for (name, quad, closed) in checks {
        if (quad - closed).abs() > tol {
            return Err(Error::Internal(format!(
                "{name}: quadrature {quad} disagrees with closed form {closed}"
            )));
        }
    }
    Ok(())
}

/// Runs [`validate_constants`] once per process, before any sampling.
pub(crate) fn ensure_constants_validated() -> Result<()> {
    static CHECKED: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    CHECKED
        .get_or_init(|| validate_constants(1e-8).map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::Internal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_through() {
        assert_eq!(npn_transform_inverse(1, 1.7), 1.7);
    }

    #[test]
    fn all_transforms_are_centered() {
        assert_eq!(npn_transform_inverse(2, 0.0), 0.0);
        assert_eq!(npn_transform_inverse(3, 0.0), 0.0);
        assert_eq!(npn_transform_inverse(4, 0.0), 0.0);
        // the exponential is centered at its mean e^(1/2), hit at x = 1/2
        assert!(npn_transform_inverse(5, 0.5).abs() < 1e-15);
    }

    #[test]
    fn sixth_moment_constant() {
        assert!((c_cube() - 15.0f64.sqrt()).abs() < 1e-15);
        assert!((c_cube() - 3.8730).abs() < 1e-4);
        let quad = gauss_integral(|t| t.powi(6));
        assert!((quad - 15.0).abs() < 1e-8, "E Z^6 quadrature = {quad}");
    }

    #[test]
    fn constants_match_quadrature() {
        validate_constants(1e-8).unwrap();
        ensure_constants_validated().unwrap();
    }

    #[test]
    fn transforms_strictly_increasing() {
        let grid: Vec<f64> = (-60..60).map(|i| i as f64 * 0.1).collect();
        for k in 1..=5 {
            for w in grid.windows(2) {
                assert!(
                    npn_transform_inverse(k, w[0]) < npn_transform_inverse(k, w[1]),
                    "transform {k} not increasing at {}",
                    w[0]
                );
            }
        }
    }

    #[test]
    fn column_cycle_has_period_five() {
        assert_eq!(NpnTransform::for_column(0), NpnTransform::Identity);
        assert_eq!(NpnTransform::for_column(4), NpnTransform::Exp);
        assert_eq!(NpnTransform::for_column(5), NpnTransform::Identity);
        assert_eq!(NpnTransform::for_column(12), NpnTransform::GaussianCdf);
    }

    #[test]
    #[should_panic(expected = "outside 1..=5")]
    fn out_of_range_index_panics() {
        npn_transform_inverse(6, 0.0);
    }
}
