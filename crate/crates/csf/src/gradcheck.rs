//! Finite-difference verification of the analytic CSF gradient.

use csf_core::simulate::{derive_seed, white_noise};
use csf_core::{convolve_valid, csf_cost, csf_gradient};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckConfig {
    pub n: usize,
    pub filter_length: usize,
    pub trials: usize,
    pub seed: u64,
    /// Central-difference step.
    pub step: f64,
    pub epsilon: f64,
    pub tolerance: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self { n: 256, filter_length: 32, trials: 20, seed: 0, step: 1e-6, epsilon: 1e-8, tolerance: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub config: GradcheckConfig,
    pub trials: Vec<TrialResult>,
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Central differences of the cost with respect to each filter tap.
pub fn finite_difference_gradient(y: &[f64], w: &[f64], epsilon: f64, step: f64) -> Result<Vec<f64>> {
    let mut probe = w.to_vec();
    (0..w.len())
        .map(|j| {
            probe[j] = w[j] + step;
            let plus = csf_cost(&convolve_valid(y, &probe)?, epsilon)?;
            probe[j] = w[j] - step;
            let minus = csf_cost(&convolve_valid(y, &probe)?, epsilon)?;
            probe[j] = w[j];
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}

/// Largest componentwise difference relative to the largest gradient
/// magnitude. Componentwise ratios are meaningless for entries near zero,
/// where differencing round-off dominates.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().chain(numeric).fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = analytic.iter().zip(numeric).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Compares analytic and numeric gradients on `trials` seeded Gaussian
/// (signal, filter) pairs.
pub fn run_gradcheck(config: &GradcheckConfig) -> Result<GradcheckReport> {
    if config.trials == 0 {
        return Err(Error::Invalid("gradcheck needs at least one trial".into()));
    }
    if !(config.step > 0.0 && config.tolerance > 0.0) {
        return Err(Error::Invalid("step and tolerance must be positive".into()));
    }
    let mut trials = Vec::with_capacity(config.trials);
    for trial in 0..config.trials {
        let y = white_noise(config.n, derive_seed(config.seed, 2 * trial as u64));
        let w = white_noise(config.filter_length, derive_seed(config.seed, 2 * trial as u64 + 1));
        let analytic = csf_gradient(&y, &w, config.epsilon)?;
        let numeric = finite_difference_gradient(&y, &w, config.epsilon, config.step)?;
        trials.push(TrialResult { trial, max_relative_error: relative_error(&analytic, &numeric) });
    }
    let max_relative_error = trials.iter().map(|t| t.max_relative_error).fold(0.0, f64::max);
    Ok(GradcheckReport {
        config: config.clone(),
        trials,
        max_relative_error,
        passed: max_relative_error <= config.tolerance,
    })
}
