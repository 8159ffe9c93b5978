//! Lloyd's k-means with k-means++ seeding and restarts.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::squared_distance;
use crate::error::{invalid, Error, Result};

const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn plus_plus_seeds(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| squared_distance(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.push(rows[pick].clone());
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(squared_distance(r, &rows[pick]));
        }
    }
    centroids
}

fn assign(rows: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (label, r) in labels.iter_mut().zip(rows) {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.iter().enumerate() {
            let d = squared_distance(r, centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        *label = best.0;
        inertia += best.1;
    }
    inertia
}

fn lloyd(rows: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let k = centroids.len();
    let dim = rows[0].len();
    let mut labels = vec![0usize; rows.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let inertia = assign(rows, &centroids, &mut labels);
        history.push(inertia);
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (r, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(r) {
                *s += v;
            }
        }
        let mut next = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                next[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // Empty clusters take the point farthest from its current centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..rows.len())
                    .max_by(|&a, &b| {
                        squared_distance(&rows[a], &next[labels[a]])
                            .total_cmp(&squared_distance(&rows[b], &next[labels[b]]))
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                next[c] = rows[far].clone();
            }
        }

        let converged = next == centroids;
        centroids = next;
        if converged || iterations >= MAX_LLOYD_ITERATIONS {
            break;
        }
    }
    let inertia = assign(rows, &centroids, &mut labels);
    if history.last().is_none_or(|&h| inertia < h) {
        history.push(inertia);
    }
    KMeansResult { labels, centroids, inertia, inertia_history: history, iterations }
}

/// Best of `n_restarts` k-means runs by final inertia.
pub fn kmeans(rows: &[Vec<f64>], k: usize, n_restarts: usize, seed: u64) -> Result<KMeansResult> {
    let n = rows.len();
    if k == 0 || k > n {
        return Err(invalid!("k must be in 1..={n}, got {k}"));
    }
    if n_restarts == 0 {
        return Err(invalid!("n_restarts must be at least 1"));
    }
    let dim = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid!("k-means input contains non-finite values"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..n_restarts {
        let seeds = plus_plus_seeds(rows, k, &mut rng);
        let run = lloyd(rows, seeds);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Fraction of samples whose cluster's majority true label matches their own.
pub fn purity(labels: &[usize], truth: &[usize]) -> Result<f64> {
    if labels.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: labels.len() });
    }
    if labels.is_empty() {
        return Err(invalid!("purity of an empty labeling"));
    }
    let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
    let n_classes = truth.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0usize; n_classes]; n_clusters];
    for (&l, &t) in labels.iter().zip(truth) {
        table[l][t] += 1;
    }
    let hits: usize = table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    Ok(hits as f64 / labels.len() as f64)
}
