//! Exact Euclidean nearest-neighbor engine.
//!
//! Distances use the expansion |x - y|^2 = |x|^2 + |y|^2 - 2 x.y with f64
//! accumulation in a fixed reference order, so results are deterministic
//! regardless of worker count. Negative squared distances from cancellation
//! are clamped to zero before the square root.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vecstore::VectorDataset;

/// Per-query sorted (ref_index, distance) lists, ascending by distance
/// with ties broken by ascending index.
#[derive(Clone, Debug)]
pub struct NeighborTable {
    pub query_count: usize,
    pub k: usize,
    entries: Vec<(usize, f64)>,
}

impl NeighborTable {
    /// Sorted neighbor list of query `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    /// Distance to the j-th nearest neighbor (1-based) of query `i`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.neighbors(i)[j - 1].1
    }
}

/// Exact minimum distance and its reference index, per query row.
#[derive(Clone, Debug)]
pub struct MinDistanceResult {
    pub distances: Vec<f64>,
    pub indices: Vec<usize>,
}

fn check_compatible<F: Real>(a: &VectorDataset<F>, b: &VectorDataset<F>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { left: a.dim(), right: b.dim() });
    }
    if a.space_tag() != b.space_tag() {
        return Err(Error::SpaceMismatch { left: a.space_tag(), right: b.space_tag() });
    }
    Ok(())
}

fn squared_norms(matrix: &[f64], dim: usize) -> Vec<f64> {
    matrix
        .chunks_exact(dim)
        .map(|row| row.iter().map(|v| v * v).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// For each query row, the exact minimum Euclidean distance to any
/// reference row and the index of that row. Ties go to the smallest index.
pub fn min_distances<F: Real>(
    queries: &VectorDataset<F>,
    refs: &VectorDataset<F>,
) -> Result<MinDistanceResult> {
    check_compatible(queries, refs)?;
    let dim = queries.dim();
    let q = queries.to_f64_matrix();
    let r = refs.to_f64_matrix();
    let r_norms = squared_norms(&r, dim);
    let q_norms = squared_norms(&q, dim);

    let results: Vec<(f64, usize)> = (0..queries.count())
        .into_par_iter()
        .map(|qi| {
            let qrow = &q[qi * dim..(qi + 1) * dim];
            let qn = q_norms[qi];
            let mut best = f64::INFINITY;
            let mut best_idx = 0usize;
            for (ri, rrow) in r.chunks_exact(dim).enumerate() {
                let d2 = qn + r_norms[ri] - 2.0 * dot(qrow, rrow);
                if d2 < best {
                    best = d2;
                    best_idx = ri;
                }
            }
            (best.max(0.0).sqrt(), best_idx)
        })
        .collect();

    Ok(MinDistanceResult {
        distances: results.iter().map(|&(d, _)| d).collect(),
        indices: results.iter().map(|&(_, i)| i).collect(),
    })
}

/// Per row, the `k_max` smallest distances to other rows of `ds`,
/// optionally excluding the row itself.
pub fn knn_table<F: Real>(
    ds: &VectorDataset<F>,
    k_max: usize,
    exclude_self: bool,
) -> Result<NeighborTable> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    let required = k_max + usize::from(exclude_self);
    if ds.count() < required {
        return Err(Error::TooFewRows { k: k_max, required, count: ds.count() });
    }

    let dim = ds.dim();
    let m = ds.to_f64_matrix();
    let norms = squared_norms(&m, dim);

    let per_query: Vec<Vec<(usize, f64)>> = (0..ds.count())
        .into_par_iter()
        .map(|qi| {
            let qrow = &m[qi * dim..(qi + 1) * dim];
            let qn = norms[qi];
            // bounded sorted list keyed by (distance^2, index); scanning
            // refs in ascending index makes the tie-break automatic
            let mut top: Vec<(f64, usize)> = Vec::with_capacity(k_max + 1);
            for (ri, rrow) in m.chunks_exact(dim).enumerate() {
                if exclude_self && ri == qi {
                    continue;
                }
                let d2 = (qn + norms[ri] - 2.0 * dot(qrow, rrow)).max(0.0);
                if top.len() == k_max && d2 >= top[k_max - 1].0 {
                    continue;
                }
                let pos = top.partition_point(|&(d, _)| d <= d2);
                top.insert(pos, (d2, ri));
                top.truncate(k_max);
            }
            top.into_iter().map(|(d2, ri)| (ri, d2.sqrt())).collect()
        })
        .collect();

    let mut entries = Vec::with_capacity(ds.count() * k_max);
    for row in per_query {
        entries.extend(row);
    }
    Ok(NeighborTable { query_count: ds.count(), k: k_max, entries })
}
