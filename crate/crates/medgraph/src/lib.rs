//! Estimation of a sparse consensus ("median") graph across several
//! heterogeneous, possibly non-Gaussian datasets.
//!
//! The pipeline is a two-step procedure. For each dataset, a latent
//! correlation matrix is estimated with Kendall's tau and the sine
//! transform, a sparse concentration matrix is recovered from it by
//! constrained l1 minimization (CLIME), and its support becomes that
//! dataset's graph. The per-dataset graphs are then aggregated into the
//! s-sparse graph minimizing the total Hamming distance, which reduces to
//! keeping the s most frequent edges.
//!
//! The crate also ships the surrounding machinery used to study the
//! estimator: a synthetic scenario generator with Gaussian-copula
//! marginals, StARS stability tuning for the per-dataset penalty, ROC and
//! edge-difference scoring, and a command-line frontend (`medgraph`).

pub mod cli;
pub mod clime;
pub mod config;
pub mod correlation;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod median;
pub mod pipeline;
pub mod stars;
pub mod synthetic;

pub use error::{Error, Result};
