//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The two-loop recursion follows Nocedal (1980); the line search is the
//! bracketing/zoom scheme of Nocedal & Wright (Algorithms 3.5 and 3.6) with
//! safeguarded cubic interpolation.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsConfig {
    /// Number of curvature pairs kept.
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once `|g| <= gradient_tolerance * |g0|`.
    pub gradient_tolerance: f64,
    /// Sufficient decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search_evaluations: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evaluations: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Objective value at the start point and at every accepted iterate.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `objective`, which returns the value at `x` and writes the
/// gradient into its second argument.
pub fn minimize<F>(mut objective: F, x0: &[f64], config: &LbfgsConfig) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    if config.memory == 0 || !(0.0 < config.c1 && config.c1 < config.c2 && config.c2 < 1.0) {
        return Err(invalid!("invalid L-BFGS configuration"));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = objective(&x, &mut g);
    let mut evaluations = 1;
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("objective is not finite at the start point".into()));
    }

    let mut history = vec![fx];
    let g0_norm = norm(&g);
    let target = config.gradient_tolerance * g0_norm;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(config.memory);
    let mut iterations = 0;
    let mut converged = g0_norm == 0.0;

    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    while !converged && iterations < config.max_iterations {
        two_loop(&g, &pairs, &mut d);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // Lost descent; restart from steepest descent.
            pairs.clear();
            two_loop(&g, &pairs, &mut d);
            slope = dot(&g, &d);
        }
        let alpha0 = if pairs.is_empty() { (1.0 / norm(&d)).min(1.0) } else { 1.0 };

        let search = line_search(
            &mut objective,
            &x,
            fx,
            slope,
            &d,
            alpha0,
            config,
            &mut x_new,
            &mut g_new,
            &mut evaluations,
        );
        let Some(f_new) = search else {
            if pairs.is_empty() {
                break;
            }
            pairs.clear();
            continue;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);

        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;
        history.push(fx);
        iterations += 1;

        if sy > 1e-12 * norm(&s) * norm(&y) {
            if pairs.len() == config.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        converged = norm(&g) <= target;
    }

    Ok(LbfgsOutcome { x, value: fx, history, iterations, evaluations, converged })
}

/// `d = -H g` with the implicit inverse-Hessian approximation.
fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, d: &mut [f64]) {
    for (di, gi) in d.iter_mut().zip(g) {
        *di = -gi;
    }
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, d);
        for (di, yi) in d.iter_mut().zip(y) {
            *di -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        for di in d.iter_mut() {
            *di *= gamma;
        }
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, d);
        for (di, si) in d.iter_mut().zip(s) {
            *di += (a - b) * si;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn line_search<F>(
    objective: &mut F,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    alpha0: f64,
    config: &LbfgsConfig,
    x_out: &mut [f64],
    g_out: &mut [f64],
    evaluations: &mut usize,
) -> Option<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut eval = |alpha: f64, x_out: &mut [f64], g_out: &mut [f64]| -> (f64, f64) {
        for ((xo, xi), di) in x_out.iter_mut().zip(x).zip(d) {
            *xo = xi + alpha * di;
        }
        *evaluations += 1;
        let f = objective(x_out, g_out);
        (f, dot(g_out, d))
    };

    let (c1, c2) = (config.c1, config.c2);
    let mut budget = config.max_line_search_evaluations;
    let mut prev = (0.0, f0, slope0);
    let mut alpha = alpha0;
    let mut first = true;

    loop {
        if budget == 0 {
            return None;
        }
        budget -= 1;
        let (f, slope) = eval(alpha, x_out, g_out);
        if !f.is_finite() {
            // Step into a non-finite region: shrink towards the last good point.
            alpha = 0.5 * (prev.0 + alpha);
            continue;
        }
        if f > f0 + c1 * alpha * slope0 || (!first && f >= prev.1) {
            return zoom(prev, (alpha, f, slope), f0, slope0, c1, c2, budget, &mut eval, x_out, g_out);
        }
        if slope.abs() <= -c2 * slope0 {
            return Some(f);
        }
        if slope >= 0.0 {
            return zoom((alpha, f, slope), prev, f0, slope0, c1, c2, budget, &mut eval, x_out, g_out);
        }
        prev = (alpha, f, slope);
        alpha *= 2.0;
        first = false;
    }
}

#[allow(clippy::too_many_arguments)]
fn zoom<E>(
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    mut budget: usize,
    eval: &mut E,
    x_out: &mut [f64],
    g_out: &mut [f64],
) -> Option<f64>
where
    E: FnMut(f64, &mut [f64], &mut [f64]) -> (f64, f64),
{
    while budget > 0 {
        budget -= 1;
        let (a_lo, a_hi) = (lo.0, hi.0);
        let width = (a_hi - a_lo).abs();
        if width <= 1e-16 * a_lo.abs().max(1e-300) {
            break;
        }
        let mut alpha = cubic_minimizer(lo, hi);
        let (left, right) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
        let guard = 0.1 * width;
        if !alpha.is_finite() || alpha < left + guard || alpha > right - guard {
            alpha = 0.5 * (a_lo + a_hi);
        }
        let (f, slope) = eval(alpha, x_out, g_out);
        if !f.is_finite() || f > f0 + c1 * alpha * slope0 || f >= lo.1 {
            hi = (alpha, f, slope);
        } else {
            if slope.abs() <= -c2 * slope0 {
                return Some(f);
            }
            if slope * (a_hi - a_lo) >= 0.0 {
                hi = lo;
            }
            lo = (alpha, f, slope);
        }
    }
    // Budget exhausted: fall back to the low end if it made progress.
    if lo.0 <= 0.0 {
        return None;
    }
    let (f, _) = eval(lo.0, x_out, g_out);
    (f < f0).then_some(f)
}

/// Minimizer of the cubic interpolating value and slope at both ends.
fn cubic_minimizer(a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    let (x1, f1, g1) = a;
    let (x2, f2, g2) = b;
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let disc = d1 * d1 - g1 * g2;
    if !(disc >= 0.0) {
        return f64::NAN;
    }
    let d2 = (x2 - x1).signum() * disc.sqrt();
    x2 - (x2 - x1) * (g2 + d2 - d1) / (g2 - g1 + 2.0 * d2)
}
