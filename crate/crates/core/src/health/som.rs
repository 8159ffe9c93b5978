//! Self-organizing map trained on healthy data; the minimum quantization
//! error (distance to the best-matching unit) measures how far a new sample
//! has drifted from that baseline.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{squared_distance, FeatureMatrix, Standardizer};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SomConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub epochs: usize,
    pub learning_rate_initial: f64,
    pub learning_rate_final: f64,
    /// `None` means `max(grid_rows, grid_cols) / 2`.
    pub radius_initial: Option<f64>,
    pub radius_final: f64,
    pub seed: u64,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            grid_rows: 8,
            grid_cols: 8,
            epochs: 200,
            learning_rate_initial: 0.5,
            learning_rate_final: 0.01,
            radius_initial: None,
            radius_final: 0.5,
            seed: 0,
        }
    }
}

impl SomConfig {
    fn validate(&self) -> Result<()> {
        if self.grid_rows < 2 || self.grid_cols < 2 {
            return Err(invalid!("SOM grid must be at least 2x2"));
        }
        if self.epochs == 0 {
            return Err(invalid!("SOM needs at least one epoch"));
        }
        let lr_ok = self.learning_rate_initial > 0.0 && self.learning_rate_final > 0.0;
        let r_ok = self.radius_final > 0.0 && self.radius_initial.is_none_or(|r| r > 0.0);
        if !(lr_ok && r_ok) {
            return Err(invalid!("learning rates and radii must be positive"));
        }
        Ok(())
    }

    fn radius_initial(&self) -> f64 {
        self.radius_initial.unwrap_or(self.grid_rows.max(self.grid_cols) as f64 / 2.0)
    }
}

/// Grid of weight vectors, row-major over the map.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Codebook {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub dim: usize,
    pub units: Vec<Vec<f64>>,
}

impl Codebook {
    /// Index of the best-matching unit and its Euclidean distance.
    pub fn best_match(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, u) in self.units.iter().enumerate() {
            let d = squared_distance(u, x);
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    fn grid_position(&self, unit: usize) -> (f64, f64) {
        ((unit / self.grid_cols) as f64, (unit % self.grid_cols) as f64)
    }
}

/// Online SOM training on rows that are already in model space.
///
/// Units start at randomly drawn training rows. Each epoch visits the rows
/// in a fresh random order; learning rate and neighborhood radius decay
/// geometrically from their initial to their final values over all steps.
pub fn train_codebook(rows: &[Vec<f64>], config: &SomConfig) -> Result<Codebook> {
    config.validate()?;
    if rows.len() < 2 {
        return Err(invalid!("need at least 2 training rows, got {}", rows.len()));
    }
    let dim = rows[0].len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(invalid!("training rows must share a nonzero dimension"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_units = config.grid_rows * config.grid_cols;
    let units: Vec<Vec<f64>> = (0..n_units).map(|_| rows[rng.random_range(0..rows.len())].clone()).collect();
    let mut codebook = Codebook { grid_rows: config.grid_rows, grid_cols: config.grid_cols, dim, units };

    let total_steps = (config.epochs * rows.len()).max(2) - 1;
    let (lr0, lr1) = (config.learning_rate_initial, config.learning_rate_final);
    let (r0, r1) = (config.radius_initial(), config.radius_final);
    let positions: Vec<(f64, f64)> = (0..n_units).map(|u| codebook.grid_position(u)).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut step = 0usize;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let progress = step as f64 / total_steps as f64;
            let lr = lr0 * (lr1 / lr0).powf(progress);
            let radius = r0 * (r1 / r0).powf(progress);
            let denom = 2.0 * radius * radius;

            let x = &rows[idx];
            let (bmu, _) = codebook.best_match(x);
            let (br, bc) = positions[bmu];
            for (unit, &(ur, uc)) in codebook.units.iter_mut().zip(&positions) {
                let g2 = (ur - br).powi(2) + (uc - bc).powi(2);
                let h = (-g2 / denom).exp();
                let rate = lr * h;
                if rate < 1e-12 {
                    continue;
                }
                for (w, xi) in unit.iter_mut().zip(x) {
                    *w += rate * (xi - *w);
                }
            }
            step += 1;
        }
    }
    Ok(codebook)
}

/// Trained health baseline: normalization statistics plus codebook.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SomModel {
    pub config: SomConfig,
    pub columns: Vec<String>,
    pub standardizer: Standardizer,
    pub codebook: Codebook,
}

impl SomModel {
    /// Fits z-score statistics on `train`, drops zero-variance columns and
    /// trains the map on the standardized rows.
    pub fn fit(train: &FeatureMatrix, config: &SomConfig) -> Result<Self> {
        let standardizer = Standardizer::fit(train)?;
        let rows = train
            .rows
            .iter()
            .map(|r| standardizer.transform_row(r))
            .collect::<Result<Vec<_>>>()?;
        let codebook = train_codebook(&rows, config)?;
        Ok(Self { config: config.clone(), columns: train.columns.clone(), standardizer, codebook })
    }

    pub fn warnings(&self) -> &[String] {
        &self.standardizer.warnings
    }

    /// Minimum quantization error of a raw (unstandardized) feature row.
    pub fn mqe(&self, sample: &[f64]) -> Result<f64> {
        let z = self.standardizer.transform_row(sample)?;
        Ok(self.codebook.best_match(&z).1)
    }

    pub fn mqe_all(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        if matrix.n_cols() != self.standardizer.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.standardizer.input_dim(), actual: matrix.n_cols() });
        }
        matrix.rows.iter().map(|r| self.mqe(r)).collect()
    }
}

/// Held-out MQE of every training row: row `i` is scored by a model fitted
/// on the remaining rows with the same configuration.
///
/// A map with more units than training rows quantizes its own training set
/// almost exactly, so in-sample MQE understates the spread of healthy data.
pub fn leave_one_out_mqe(train: &FeatureMatrix, config: &SomConfig) -> Result<Vec<f64>> {
    let n = train.n_rows();
    if n < 3 {
        return Err(invalid!("leave-one-out needs at least 3 training rows, got {n}"));
    }
    (0..n)
        .map(|i| {
            let rest: Vec<Vec<f64>> =
                train.rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone()).collect();
            let model = SomModel::fit(&FeatureMatrix { columns: train.columns.clone(), rows: rest }, config)?;
            model.mqe(&train.rows[i])
        })
        .collect()
}

/// `mean + k * std` of a set of training MQE values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlarmThreshold {
    pub mean: f64,
    pub std: f64,
    pub k_sigma: f64,
}

impl AlarmThreshold {
    pub fn from_training(mqe: &[f64], k_sigma: f64) -> Result<Self> {
        if mqe.len() < 2 {
            return Err(invalid!("need at least 2 training MQE values"));
        }
        let n = mqe.len() as f64;
        let mean = mqe.iter().sum::<f64>() / n;
        let std = (mqe.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        Ok(Self { mean, std, k_sigma })
    }

    pub fn value(&self) -> f64 {
        self.mean + self.k_sigma * self.std
    }
}

/// First index at or after `start` whose value exceeds `threshold`.
pub fn alarm_index(series: &[f64], threshold: f64, start: usize) -> Option<usize> {
    series.iter().enumerate().skip(start).find(|(_, &v)| v > threshold).map(|(i, _)| i)
}
