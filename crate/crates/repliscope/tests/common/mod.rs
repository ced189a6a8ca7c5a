//! Shared test helpers: a naive double-loop distance oracle kept
//! independent of the blocked engine, and synthetic dataset builders
//! with known ground truth.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use repliscope::scalar::Real;
use repliscope::vecstore::{SpaceTag, VectorDataset};

/// Direct-subtraction Euclidean distance; no dot-product expansion.
pub fn naive_distance<F: Real>(a: &[F], b: &[F]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.as_f64() - y.as_f64();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// O(n*m*d) min-distance oracle with smallest-index tie-break.
pub fn naive_min_distances<F: Real>(
    queries: &VectorDataset<F>,
    refs: &VectorDataset<F>,
) -> Vec<(f64, usize)> {
    (0..queries.count())
        .map(|qi| {
            let mut best = f64::INFINITY;
            let mut best_idx = 0;
            for ri in 0..refs.count() {
                let d = naive_distance(queries.row(qi), refs.row(ri));
                if d < best {
                    best = d;
                    best_idx = ri;
                }
            }
            (best, best_idx)
        })
        .collect()
}

/// O(n^2 d) full-sort k-NN oracle.
pub fn naive_knn_table<F: Real>(
    ds: &VectorDataset<F>,
    k: usize,
    exclude_self: bool,
) -> Vec<Vec<(usize, f64)>> {
    (0..ds.count())
        .map(|qi| {
            let mut all: Vec<(usize, f64)> = (0..ds.count())
                .filter(|&ri| !(exclude_self && ri == qi))
                .map(|ri| (ri, naive_distance(ds.row(qi), ds.row(ri))))
                .collect();
            all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            all.truncate(k);
            all
        })
        .collect()
}

pub fn random_dataset_f32(count: usize, dim: usize, seed: u64) -> VectorDataset<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f32> = (0..count * dim)
        .map(|_| rng.random_range(0.0f32..255.0))
        .collect();
    VectorDataset::new(count, dim, values, None, SpaceTag::PixelRaw0255).unwrap()
}

pub fn random_dataset_f64(count: usize, dim: usize, seed: u64) -> VectorDataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..count * dim)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    VectorDataset::new(count, dim, values, None, SpaceTag::ExternalEmbedding).unwrap()
}

/// Random orthogonal `dim x dim` matrix (rows orthonormal), built by
/// Gram-Schmidt on seeded Gaussian vectors.
pub fn random_orthogonal(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(normal)).collect();
        for q in &rows {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            rows.push(v);
        }
    }
    rows
}

/// `n` points uniform in the unit d-cube, embedded into `ambient` dims
/// by the first d rows of a random orthogonal transform.
pub fn uniform_cube_rotated(n: usize, d: usize, ambient: usize, seed: u64) -> VectorDataset<f64> {
    assert!(d <= ambient);
    let q = random_orthogonal(ambient, seed.wrapping_add(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * ambient);
    for _ in 0..n {
        let coords: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        for j in 0..ambient {
            let v: f64 = coords.iter().enumerate().map(|(k, &c)| c * q[k][j]).sum();
            values.push(v);
        }
    }
    VectorDataset::new(n, ambient, values, None, SpaceTag::ExternalEmbedding).unwrap()
}

/// Apply a linear map (rows x rows matrix) plus a shift to every row.
pub fn transform_dataset(
    ds: &VectorDataset<f64>,
    matrix: &[Vec<f64>],
    shift: &[f64],
) -> VectorDataset<f64> {
    let dim = ds.dim();
    let mut values = Vec::with_capacity(ds.count() * dim);
    for i in 0..ds.count() {
        let row = ds.row(i);
        for j in 0..dim {
            let v: f64 = row.iter().enumerate().map(|(k, &x)| x * matrix[j][k]).sum();
            values.push(v + shift[j]);
        }
    }
    VectorDataset::new(ds.count(), dim, values, None, ds.space_tag()).unwrap()
}

pub fn scale_dataset(ds: &VectorDataset<f64>, factor: f64) -> VectorDataset<f64> {
    let values: Vec<f64> = ds.values().iter().map(|&v| v * factor).collect();
    VectorDataset::new(ds.count(), ds.dim(), values, None, ds.space_tag()).unwrap()
}

pub fn permute_dataset(ds: &VectorDataset<f64>, seed: u64) -> VectorDataset<f64> {
    let mut order: Vec<usize> = (0..ds.count()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut values = Vec::with_capacity(ds.count() * ds.dim());
    for &i in &order {
        values.extend_from_slice(ds.row(i));
    }
    VectorDataset::new(ds.count(), ds.dim(), values, None, ds.space_tag()).unwrap()
}
