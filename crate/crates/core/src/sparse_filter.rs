//! Single-neuron convolutional sparse filter and the MED baseline.
//!
//! The sparse filter looks for FIR coefficients `w` whose output
//! `f = Y w` (with `Y` the Hankel matrix of the input) has the smallest
//! l1/l2 ratio, computed with the soft absolute value
//! `c_i = sqrt(f_i^2 + epsilon)`. The ratio is homogeneous of degree zero in
//! `w` (up to the smoothing term), so the problem is solved unconstrained with
//! L-BFGS and `w` is scaled to unit norm afterwards.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{degenerate, invalid, Error, Result};
use crate::features::kurtosis;
use crate::linalg::cholesky_solve;
use crate::optim::{self, LbfgsConfig};
use crate::signal::{centered, hankel_product, hankel_transpose_product, Signal};

/// Smoothing constant of the soft absolute value.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// How the filter coefficients are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InitScheme {
    /// Unit spike at index `ceil(l/2)` (1-based).
    #[default]
    CenterSpike,
    /// Unit-normalized standard normal draws from `seed`.
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CsfConfig {
    pub filter_length: usize,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Relative to the initial gradient norm for the sparse filter; absolute
    /// change in unit-norm coefficients for MED.
    pub gradient_tolerance: f64,
    pub init_scheme: InitScheme,
    pub seed: u64,
    /// L-BFGS memory depth.
    pub memory: usize,
}

impl Default for CsfConfig {
    fn default() -> Self {
        Self {
            filter_length: 100,
            epsilon: DEFAULT_EPSILON,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            init_scheme: InitScheme::CenterSpike,
            seed: 0,
            memory: 10,
        }
    }
}

impl CsfConfig {
    pub fn with_filter_length(mut self, filter_length: usize) -> Self {
        self.filter_length = filter_length;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        let l = self.filter_length;
        if l < 2 || 2 * l > n {
            return Err(invalid!("filter length {l} outside [2, N/2] for N = {n}"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.max_iterations == 0 {
            return Err(invalid!("max_iterations must be at least 1"));
        }
        if !(self.gradient_tolerance >= 0.0) {
            return Err(invalid!("gradient tolerance must be nonnegative"));
        }
        if self.memory == 0 {
            return Err(invalid!("L-BFGS memory must be at least 1"));
        }
        Ok(())
    }

    fn initial_filter(&self) -> Vec<f64> {
        let l = self.filter_length;
        match self.init_scheme {
            InitScheme::CenterSpike => {
                let mut w = vec![0.0; l];
                w[l.div_ceil(2) - 1] = 1.0;
                w
            }
            InitScheme::SeededRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut w: Vec<f64> = (0..l).map(|_| rng.sample(StandardNormal)).collect();
                normalize(&mut w);
                w
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CsfResult {
    /// Unit-norm filter coefficients.
    pub w: Vec<f64>,
    /// `Y w`, length `N - l + 1`.
    pub filtered: Vec<f64>,
    /// Objective per accepted iterate, starting with the initial filter.
    /// For MED this holds the negated kurtosis of the output.
    pub cost_history: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl CsfResult {
    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().expect("history holds at least the initial cost")
    }

    pub fn initial_cost(&self) -> f64 {
        self.cost_history[0]
    }

    /// Filtered output as a [`Signal`] at the given sample rate.
    pub fn filtered_signal(&self, sample_rate_hz: f64) -> Result<Signal> {
        Signal::new(self.filtered.clone(), sample_rate_hz)
    }
}

fn normalize(w: &mut [f64]) {
    let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in w.iter_mut() {
            *v /= n;
        }
    }
}

/// Smoothed l1/l2 ratio `sum(c) / sqrt(sum(c^2))`, `c_i = sqrt(f_i^2 + epsilon)`.
pub fn csf_cost(f: &[f64], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(invalid!("epsilon must be positive, got {epsilon}"));
    }
    if f.iter().all(|&v| v == 0.0) {
        return Err(degenerate!("cost of an all-zero vector"));
    }
    let (s1, s2) = f.iter().fold((0.0, 0.0), |(s1, s2), &v| {
        let c2 = v * v + epsilon;
        (s1 + c2.sqrt(), s2 + c2)
    });
    Ok(s1 / s2.sqrt())
}

/// Sum of row-wise [`csf_cost`] over a feature matrix (one feature per row).
pub fn csf_cost_multi<R: AsRef<[f64]>>(rows: &[R], epsilon: f64) -> Result<f64> {
    if rows.is_empty() {
        return Err(invalid!("feature matrix needs at least one row"));
    }
    rows.iter().map(|r| csf_cost(r.as_ref(), epsilon)).sum()
}

/// Gradient of `csf_cost(convolve_valid(y, w))` with respect to `w`.
///
/// Only needs `w.len() <= y.len()`; the `N/2` bound of [`convolve_valid`]
/// is a fitting constraint, not a property of the gradient.
pub fn csf_gradient(y: &[f64], w: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    let l = w.len();
    if l == 0 || l > y.len() {
        return Err(invalid!("filter length {l} does not fit a signal of length {}", y.len()));
    }
    if w.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid!("non-finite input"));
    }
    let f = hankel_product(y, w);
    if f.iter().all(|&v| v == 0.0) {
        return Err(degenerate!("filter output is identically zero"));
    }
    if !(epsilon > 0.0) {
        return Err(invalid!("epsilon must be positive, got {epsilon}"));
    }
    let mut grad = vec![0.0; w.len()];
    let mut scratch = vec![0.0; f.len()];
    cost_gradient_from_output(y, &f, epsilon, &mut scratch, &mut grad);
    Ok(grad)
}

/// Cost of output `f` and its gradient with respect to `w`, chaining
/// `dJ/dc_i * dc_i/df_i` back through the Hankel product.
fn cost_gradient_from_output(y: &[f64], f: &[f64], epsilon: f64, scratch: &mut [f64], grad: &mut [f64]) -> f64 {
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (&v, c) in f.iter().zip(scratch.iter_mut()) {
        let c2 = v * v + epsilon;
        *c = c2.sqrt();
        s1 += *c;
        s2 += c2;
    }
    let norm2 = s2.sqrt();
    let inv_norm2 = 1.0 / norm2;
    let ratio = s1 / (s2 * norm2);
    for (&v, c) in f.iter().zip(scratch.iter_mut()) {
        // dJ/dc = 1/|c|_2 - (sum c) c / |c|_2^3, dc/df = f / c.
        let dj_dc = inv_norm2 - ratio * *c;
        *c = dj_dc * v / *c;
    }
    hankel_transpose_product(y, scratch, grad.len(), grad);
    s1 * inv_norm2
}

/// Learns a unit-norm sparse filter for `signal`.
pub fn fit_simplified_csf(signal: &Signal, config: &CsfConfig) -> Result<CsfResult> {
    let y = signal.samples();
    config.validate(y.len())?;
    centered(y).map_err(|_| degenerate!("signal is constant"))?;

    let l = config.filter_length;
    let eps = config.epsilon;
    let m = y.len() - l + 1;
    let mut f = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let objective = |w: &[f64], grad: &mut [f64]| -> f64 {
        for (i, out) in f.iter_mut().enumerate() {
            *out = y[i..i + l].iter().zip(w).map(|(a, b)| a * b).sum();
        }
        cost_gradient_from_output(y, &f, eps, &mut scratch, grad)
    };

    let lbfgs = LbfgsConfig {
        memory: config.memory,
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        ..LbfgsConfig::default()
    };
    let outcome = optim::minimize(objective, &config.initial_filter(), &lbfgs)?;

    let mut w = outcome.x;
    normalize(&mut w);
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("optimizer produced non-finite coefficients".into()));
    }
    let filtered = hankel_product(y, &w);
    Ok(CsfResult {
        w,
        filtered,
        cost_history: outcome.history,
        converged: outcome.converged,
        iterations: outcome.iterations,
    })
}

/// Minimum entropy deconvolution: fixed-point iteration on the Toeplitz
/// normal equations `A w = b`, `b_j = sum_i f_i^3 y_{i+j}`.
pub fn fit_med(signal: &Signal, config: &CsfConfig) -> Result<CsfResult> {
    let y = signal.samples();
    config.validate(y.len())?;
    centered(y).map_err(|_| degenerate!("signal is constant"))?;

    let l = config.filter_length;
    let n = y.len();
    let m = n - l + 1;

    // Autocorrelation matrix, lags 0..l-1, with diagonal loading.
    let r: Vec<f64> = (0..l).map(|k| y[..n - k].iter().zip(&y[k..]).map(|(a, b)| a * b).sum()).collect();
    let mut a = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..l {
            a[i * l + j] = r[i.abs_diff(j)];
        }
    }
    let loading = 1e-8 * r[0];
    for i in 0..l {
        a[i * l + i] += loading;
    }

    let mut w = config.initial_filter();
    let mut f = hankel_product(y, &w);
    let mut history = vec![-med_objective(&f)?];
    let mut cubes = vec![0.0; m];
    let mut b = vec![0.0; l];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        for (c, v) in cubes.iter_mut().zip(&f) {
            *c = v * v * v;
        }
        hankel_transpose_product(y, &cubes, l, &mut b);
        let mut w_new = cholesky_solve(&a, &b)?;
        normalize(&mut w_new);
        if w_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("MED update is not finite".into()));
        }
        let change = w_new.iter().zip(&w).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        w = w_new;
        f = hankel_product(y, &w);
        history.push(-med_objective(&f)?);
        iterations += 1;
        if change < config.gradient_tolerance {
            converged = true;
            break;
        }
    }

    Ok(CsfResult { w, filtered: f, cost_history: history, converged, iterations })
}

fn med_objective(f: &[f64]) -> Result<f64> {
    kurtosis(f).map_err(|_| Error::NumericalFailure("MED output collapsed to a constant".into()))
}
