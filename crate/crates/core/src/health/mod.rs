//! Downstream health modelling on feature matrices: SOM-MQE assessment,
//! PCA, k-means and VAT.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::features::FeatureVector;

pub mod kmeans;
pub mod pca;
pub mod som;
pub mod vat;

pub use kmeans::{kmeans, purity, KMeansResult};
pub use pca::{pca_fit_transform, Pca};
pub use som::{alarm_index, leave_one_out_mqe, train_codebook, AlarmThreshold, Codebook, SomConfig, SomModel};
pub use vat::{euclidean_distances, vat_order, VatResult};

/// Dense row-major matrix of samples (rows) by named features (columns).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::DimensionMismatch { expected: columns.len(), actual: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(invalid!("row {i} contains non-finite values"));
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn from_features(features: &[FeatureVector]) -> Self {
        Self {
            columns: FeatureVector::NAMES.iter().map(|s| s.to_string()).collect(),
            rows: features.iter().map(FeatureVector::to_vec).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Rows `range` as a new matrix.
    pub fn slice_rows(&self, range: core::ops::Range<usize>) -> Self {
        Self { columns: self.columns.clone(), rows: self.rows[range].to_vec() }
    }
}

/// Per-column z-score statistics fitted on a training split. Columns with
/// zero variance are dropped and reported.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Indices of the columns kept, in input order.
    pub active: Vec<usize>,
    /// Human readable notes about dropped columns.
    pub warnings: Vec<String>,
}

impl Standardizer {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        let n = train.n_rows();
        if n < 2 {
            return Err(invalid!("need at least 2 training rows, got {n}"));
        }
        let d = train.n_cols();
        let mut mean = alloc::vec![0.0; d];
        let mut std = alloc::vec![0.0; d];
        let mut active = Vec::new();
        let mut warnings = Vec::new();
        for j in 0..d {
            let m = train.rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let var = train.rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            mean[j] = m;
            std[j] = var.sqrt();
            if std[j] > 1e-12 * m.abs().max(1e-300) && std[j] > 0.0 {
                active.push(j);
            } else {
                warnings.push(alloc::format!("column '{}' has zero variance and was dropped", train.columns[j]));
            }
        }
        if active.is_empty() {
            return Err(Error::DegenerateInput("every feature column has zero variance".into()));
        }
        Ok(Self { mean, std, active, warnings })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.active.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), actual: row.len() });
        }
        Ok(self.active.iter().map(|&j| (row[j] - self.mean[j]) / self.std[j]).collect())
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
