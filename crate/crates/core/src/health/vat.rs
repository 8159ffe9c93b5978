//! Visual assessment of cluster tendency: a Prim-style reordering of a
//! dissimilarity matrix so that clusters show up as diagonal blocks.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods win when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VatResult {
    /// `order[k]` is the input index placed at position `k`.
    pub order: Vec<usize>,
    pub reordered: Vec<Vec<f64>>,
}

/// Pairwise Euclidean distances between rows.
pub fn euclidean_distances(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = super::squared_distance(&rows[i], &rows[j]).sqrt();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

fn validate(d: &[Vec<f64>]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Err(invalid!("dissimilarity matrix is empty"));
    }
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
        }
        if row[i] != 0.0 {
            return Err(invalid!("diagonal entry {i} is {} instead of 0", row[i]));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid!("entry ({i}, {j}) = {v} is negative or non-finite"));
            }
            let tol = 1e-12 * v.abs().max(d[j][i].abs()).max(1.0);
            if (v - d[j][i]).abs() > tol {
                return Err(invalid!("matrix is not symmetric at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

/// Orders samples starting from one end of the largest dissimilarity and
/// repeatedly appending the unvisited sample closest to the visited set.
/// Ties go to the lowest index.
pub fn vat_order(d: &[Vec<f64>]) -> Result<VatResult> {
    validate(d)?;
    let n = d.len();

    let mut start = 0;
    let mut max = -1.0;
    for (i, row) in d.iter().enumerate() {
        for &v in row {
            if v > max {
                max = v;
                start = i;
            }
        }
    }

    let mut visited = vec![false; n];
    let mut link = vec![f64::INFINITY; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    for _ in 0..n {
        visited[current] = true;
        order.push(current);
        for j in 0..n {
            if !visited[j] {
                link[j] = link[j].min(d[current][j]);
            }
        }
        let mut next = None;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if !visited[j] && link[j] < best {
                best = link[j];
                next = Some(j);
            }
        }
        match next {
            Some(j) => current = j,
            None => break,
        }
    }

    let reordered = order.iter().map(|&i| order.iter().map(|&j| d[i][j]).collect()).collect();
    Ok(VatResult { order, reordered })
}
