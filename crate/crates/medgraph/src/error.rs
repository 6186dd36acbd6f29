//! Error type shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when estimating a median graph.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("column {column} has zero sample variance")]
    DegenerateColumn { column: usize },

    /// The column linear program has no feasible point. Happens when the
    /// correlation matrix is rank deficient and lambda is too small.
    #[error("CLIME program infeasible for column {column} at lambda {lambda}")]
    Infeasible { column: usize, lambda: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Edge occurrence counts are tied exactly at the rank-s boundary, so the
    /// s-sparse consensus graph is not unique. Pairs are 0-based.
    #[error("edge counts tied at the rank-{s} boundary: {}", fmt_pairs(tied))]
    TieAtRankS { s: usize, tied: Vec<(usize, usize)> },

    #[error("sparsity {s} out of range 0..={max}")]
    InvalidSparsity { s: usize, max: usize },

    #[error("invalid graph pattern: {0}")]
    InvalidPattern(String),

    #[error("cannot add {requested} edges: only {available} non-edges available")]
    InvalidPerturbation { requested: usize, available: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Exhaustive verification was asked for an instance too big to enumerate.
    #[error("exhaustive search over {pairs} candidate pairs exceeds the budget of {max}")]
    TooLarge { pairs: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),

    /// Adds dataset context to an error from a per-dataset solve.
    /// The index shown is 1-based, matching the external convention.
    #[error("dataset {}: {source}", dataset + 1)]
    Dataset {
        dataset: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_dataset(dataset: usize, source: Error) -> Self {
        Error::Dataset {
            dataset,
            source: Box::new(source),
        }
    }

    /// Short machine-readable tag, used by the CLI's JSON error channel.
    /// Dataset wrappers report the tag of the underlying failure.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dataset { source, .. } => source.kind(),
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::DegenerateColumn { .. } => "degenerate_column",
            Error::Infeasible { .. } => "infeasible",
            Error::EmptyInput(_) => "empty_input",
            Error::TieAtRankS { .. } => "tie_at_rank_s",
            Error::InvalidSparsity { .. } => "invalid_sparsity",
            Error::InvalidPattern(_) => "invalid_pattern",
            Error::InvalidPerturbation { .. } => "invalid_perturbation",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::TooLarge { .. } => "too_large",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Internal(_) => "internal",
        }
    }
}

fn fmt_pairs(pairs: &[(usize, usize)]) -> String {
    let inner: Vec<String> = pairs
        .iter()
        .map(|&(j, k)| format!("({},{})", j + 1, k + 1))
        .collect();
    format!("{{{}}}", inner.join(", "))
}
