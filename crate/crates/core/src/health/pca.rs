//! Principal component analysis on column-centered, z-scaled data.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::linalg::symmetric_eigen;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Column scale factors; 1.0 for columns without variance.
    pub scale: Vec<f64>,
    /// `components[k]` is the k-th loading vector (unit length).
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Fraction of the total variance captured by each kept component.
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    /// Fits `n_components` principal axes. With `standardize`, each column is
    /// divided by its sample standard deviation after centering.
    pub fn fit(rows: &[Vec<f64>], n_components: usize, standardize: bool) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(invalid!("PCA needs at least 2 rows, got {n}"));
        }
        let d = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, actual: bad.len() });
        }
        if n_components == 0 || n_components > d {
            return Err(invalid!("n_components must be in 1..={d}, got {n_components}"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid!("PCA input contains non-finite values"));
        }

        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut scale = vec![1.0; d];
        if standardize {
            for (j, s) in scale.iter_mut().enumerate() {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1) as f64;
                if var > 0.0 {
                    *s = var.sqrt();
                }
            }
        }

        let mut cov = vec![0.0; d * d];
        for r in rows {
            let z: Vec<f64> = (0..d).map(|j| (r[j] - mean[j]) / scale[j]).collect();
            for a in 0..d {
                for b in a..d {
                    cov[a * d + b] += z[a] * z[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                cov[a * d + b] /= (n - 1) as f64;
                cov[b * d + a] = cov[a * d + b];
            }
        }

        let (values, vectors) = symmetric_eigen(&cov, d)?;
        let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
        let mut components = Vec::with_capacity(n_components);
        let mut explained_variance = Vec::with_capacity(n_components);
        let mut explained_variance_ratio = Vec::with_capacity(n_components);
        for k in 0..n_components {
            let mut v = vectors[k].clone();
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let lambda = values[k].max(0.0);
            components.push(v);
            explained_variance.push(lambda);
            explained_variance_ratio.push(if total > 0.0 { lambda / total } else { 0.0 });
        }
        Ok(Self { mean, scale, components, explained_variance, explained_variance_ratio })
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), actual: row.len() });
        }
        Ok(self
            .components
            .iter()
            .map(|c| (0..row.len()).map(|j| c[j] * (row[j] - self.mean[j]) / self.scale[j]).sum())
            .collect())
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    /// Maps scores back to the original feature space.
    pub fn inverse_transform_row(&self, scores: &[f64]) -> Result<Vec<f64>> {
        if scores.len() != self.n_components() {
            return Err(Error::DimensionMismatch { expected: self.n_components(), actual: scores.len() });
        }
        let d = self.mean.len();
        let mut out = vec![0.0; d];
        for (c, s) in self.components.iter().zip(scores) {
            for j in 0..d {
                out[j] += c[j] * s;
            }
        }
        for j in 0..d {
            out[j] = out[j] * self.scale[j] + self.mean[j];
        }
        Ok(out)
    }
}

/// Fits PCA on z-scaled rows and returns the fitted model and the scores.
pub fn pca_fit_transform(rows: &[Vec<f64>], n_components: usize) -> Result<(Pca, Vec<Vec<f64>>)> {
    let pca = Pca::fit(rows, n_components, true)?;
    let scores = pca.transform(rows)?;
    Ok((pca, scores))
}
