//! Correlation and concentration matrix value types, plus the multi-dataset
//! observation container.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// How far a candidate correlation matrix may deviate from its invariants
/// (symmetry, unit diagonal, entries in `[-1, 1]`) before construction fails
/// instead of canonicalizing.
const CANON_TOL: f64 = 1e-8;

/// Symmetric matrix with unit diagonal and entries in `[-1, 1]`.
///
/// Construction canonicalizes round-off: the strict upper triangle is
/// mirrored onto the lower one, the diagonal is forced to exactly 1 and
/// entries are clamped to `[-1, 1]`. Deviations beyond `1e-8` are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    values: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn identity(dim: usize) -> Self {
        CorrelationMatrix {
            dim,
            values: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let (r, c) = values.shape();
        if r != c {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        let mut canon = values;
        for j in 0..r {
            let diag = canon[(j, j)];
            if !diag.is_finite() || (diag - 1.0).abs() > CANON_TOL {
                return Err(Error::InvalidConfig(format!(
                    "diagonal entry ({j},{j}) = {diag} is not 1"
                )));
            }
            canon[(j, j)] = 1.0;
            for k in j + 1..r {
                let upper = canon[(j, k)];
                let lower = canon[(k, j)];
                if !upper.is_finite() || (upper - lower).abs() > CANON_TOL {
                    return Err(Error::InvalidConfig(format!(
                        "asymmetric entries at ({j},{k}): {upper} vs {lower}"
                    )));
                }
                if upper.abs() > 1.0 + CANON_TOL {
                    return Err(Error::InvalidConfig(format!(
                        "entry ({j},{k}) = {upper} outside [-1, 1]"
                    )));
                }
                let v = upper.clamp(-1.0, 1.0);
                canon[(j, k)] = v;
                canon[(k, j)] = v;
            }
        }
        Ok(CorrelationMatrix {
            dim: r,
            values: canon,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j, k)]
    }

    /// Largest absolute entrywise difference to another matrix of equal size.
    pub fn max_norm_distance(&self, other: &CorrelationMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for k in 0..self.dim {
                worst = worst.max((self.values[(j, k)] - other.values[(j, k)]).abs());
            }
        }
        Ok(worst)
    }
}

/// Symmetrized estimate of a concentration (inverse correlation) matrix,
/// tagged with the tuning parameter that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationEstimate {
    dim: usize,
    values: DMatrix<f64>,
    lambda: f64,
}

impl ConcentrationEstimate {
    pub(crate) fn new(values: DMatrix<f64>, lambda: f64) -> Self {
        debug_assert_eq!(values.nrows(), values.ncols());
        ConcentrationEstimate {
            dim: values.nrows(),
            values,
            lambda,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j, k)]
    }

    /// Tuning parameter the estimate was computed with.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// An ordered collection of observation matrices over a shared variable set.
///
/// Dataset `t` holds `n_t` rows of `d` columns; the `n_t` may differ across
/// datasets, the `d` may not.
#[derive(Debug, Clone)]
pub struct DatasetCollection {
    datasets: Vec<DMatrix<f64>>,
    labels: Option<Vec<String>>,
}

impl DatasetCollection {
    pub fn new(datasets: Vec<DMatrix<f64>>) -> Result<Self> {
        if datasets.is_empty() {
            return Err(Error::EmptyInput("dataset collection"));
        }
        let dim = datasets[0].ncols();
        for m in &datasets {
            if m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: m.ncols(),
                    right: dim,
                });
            }
            if m.nrows() < 2 {
                return Err(Error::InsufficientData {
                    needed: 2,
                    got: m.nrows(),
                });
            }
        }
        Ok(DatasetCollection {
            datasets,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.datasets.len() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: self.datasets.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Number of datasets.
    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    /// Shared variable count.
    pub fn dim(&self) -> usize {
        self.datasets[0].ncols()
    }

    pub fn datasets(&self) -> &[DMatrix<f64>] {
        &self.datasets
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Stacks all observation rows into one matrix, in dataset order.
    pub fn pooled(&self) -> DMatrix<f64> {
        let total: usize = self.datasets.iter().map(|m| m.nrows()).sum();
        let d = self.dim();
        let mut out = DMatrix::zeros(total, d);
        let mut row = 0;
        for m in &self.datasets {
            out.rows_mut(row, m.nrows()).copy_from(m);
            row += m.nrows();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_matrix_canonicalizes_roundoff() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = 1.0 + 1e-12;
        m[(1, 0)] = 1.0 - 1e-12;
        let c = CorrelationMatrix::from_matrix(m).unwrap();
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.get(1, 0), 1.0);
    }

    #[test]
    fn correlation_matrix_rejects_structural_problems() {
        let mut bad_diag = DMatrix::identity(2, 2);
        bad_diag[(0, 0)] = 0.5;
        assert!(CorrelationMatrix::from_matrix(bad_diag).is_err());

        let mut asym = DMatrix::identity(2, 2);
        asym[(0, 1)] = 0.2;
        asym[(1, 0)] = -0.2;
        assert!(CorrelationMatrix::from_matrix(asym).is_err());

        let mut oob = DMatrix::identity(2, 2);
        oob[(0, 1)] = 1.5;
        oob[(1, 0)] = 1.5;
        assert!(CorrelationMatrix::from_matrix(oob).is_err());

        assert!(CorrelationMatrix::from_matrix(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn collection_validates_shapes() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 3.0]);
        let b = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let coll = DatasetCollection::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(coll.len(), 2);
        assert_eq!(coll.dim(), 2);
        let pooled = coll.pooled();
        assert_eq!(pooled.nrows(), 5);
        assert_eq!(pooled.row(2)[0], 0.0);

        let narrow = DMatrix::zeros(2, 3);
        assert!(DatasetCollection::new(vec![a.clone(), narrow]).is_err());
        let single_row = DMatrix::zeros(1, 2);
        assert!(DatasetCollection::new(vec![a, single_row]).is_err());
        assert!(DatasetCollection::new(vec![]).is_err());
        assert!(DatasetCollection::new(vec![b])
            .unwrap()
            .with_labels(vec!["a".into(), "b".into()])
            .is_err());
    }
}
