//! Maximum-likelihood intrinsic-dimensionality estimation from k-NN
//! distance ratios, averaged over a range of neighborhood sizes.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::knn;
use crate::scalar::Real;
use crate::vecstore::VectorDataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DuplicatePolicy {
    /// Drop exact duplicate rows (keep the lowest index) and record a warning.
    DeduplicateWarn,
    /// Fail when exact duplicate rows are present.
    Error,
}

#[derive(Clone, Copy, Debug)]
pub struct IdConfig {
    pub k1: usize,
    pub k2: usize,
    pub duplicate_policy: DuplicatePolicy,
}

impl Default for IdConfig {
    fn default() -> Self {
        Self { k1: 10, k2: 20, duplicate_policy: DuplicatePolicy::DeduplicateWarn }
    }
}

impl IdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k1 < 2 || self.k1 > self.k2 {
            return Err(Error::InvalidInput(format!(
                "require 2 <= k1 <= k2, got k1={} k2={}",
                self.k1, self.k2
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IdEstimate {
    /// The intrinsic-dimensionality estimate, dimensionless.
    pub value: f64,
    pub config: IdConfig,
    /// Points contributing after duplicate handling.
    pub n_used: usize,
    /// Per-point average of m-hat over k in [k1, k2], in kept-row order.
    pub per_point: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Single-point, single-k estimate from sorted neighbor distances:
/// `[(1/(k-1)) * sum_{j=1}^{k-1} ln(T_k / T_j)]^-1`.
pub fn mk_hat(t: &[f64], k: usize) -> Result<f64> {
    if k < 2 || t.len() < k {
        return Err(Error::InvalidInput(format!(
            "need k >= 2 and at least k distances, got k={k} with {} distances",
            t.len()
        )));
    }
    let tk = t[k - 1];
    let mut sum = 0.0;
    for (j, &tj) in t[..k - 1].iter().enumerate() {
        if tj <= 0.0 || tk <= 0.0 {
            return Err(Error::DuplicateDistance(j + 1));
        }
        sum += (tk / tj).ln();
    }
    if sum <= 0.0 {
        return Err(Error::DegenerateFit(
            "all neighbor distances equal: zero log-sum, locally zero-dimensional".into(),
        ));
    }
    Ok((k - 1) as f64 / sum)
}

/// Estimate intrinsic dimensionality by averaging [`mk_hat`] over all
/// points and all k in `[k1, k2]`, on a self-excluded k-NN table of
/// depth k2.
pub fn estimate_id<F: Real>(ds: &VectorDataset<F>, cfg: &IdConfig) -> Result<IdEstimate> {
    cfg.validate()?;

    let (ds, n_dups, mut warnings) = deduplicate(ds, cfg.duplicate_policy)?;
    if n_dups > 0 {
        warnings.push(format!("{n_dups} exact duplicate row(s) removed"));
    }
    let n_used = ds.count();
    if n_used < cfg.k2 + 1 {
        return Err(Error::TooFewRows { k: cfg.k2, required: cfg.k2 + 1, count: n_used });
    }

    let table = knn::knn_table(&ds, cfg.k2, true)?;
    let k_span = (cfg.k2 - cfg.k1 + 1) as f64;

    let mut per_point = Vec::with_capacity(n_used);
    let mut total = 0.0;
    for i in 0..n_used {
        let dists: Vec<f64> = table.neighbors(i).iter().map(|&(_, d)| d).collect();
        let mut point_sum = 0.0;
        for k in cfg.k1..=cfg.k2 {
            point_sum += mk_hat(&dists, k)?;
        }
        per_point.push(point_sum / k_span);
        total += point_sum;
    }

    Ok(IdEstimate {
        value: total / (n_used as f64 * k_span),
        config: *cfg,
        n_used,
        per_point,
        warnings,
    })
}

fn deduplicate<F: Real>(
    ds: &VectorDataset<F>,
    policy: DuplicatePolicy,
) -> Result<(VectorDataset<F>, usize, Vec<String>)> {
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut keep = Vec::with_capacity(ds.count());
    let mut first_pair = None;
    let mut n_dups = 0usize;

    for i in 0..ds.count() {
        let key = row_bits_hash(ds.row(i));
        let bucket = seen.entry(key).or_default();
        let dup_of = bucket.iter().copied().find(|&j| ds.rows_bit_equal(i, j));
        match dup_of {
            Some(j) => {
                n_dups += 1;
                if first_pair.is_none() {
                    first_pair = Some((j, i));
                }
            }
            None => {
                bucket.push(i);
                keep.push(i);
            }
        }
    }

    if n_dups > 0 && policy == DuplicatePolicy::Error {
        return Err(Error::DuplicateRows(n_dups, first_pair.unwrap()));
    }
    if n_dups == 0 {
        return Ok((ds.clone(), 0, Vec::new()));
    }

    let mut values = Vec::with_capacity(keep.len() * ds.dim());
    for &i in &keep {
        values.extend_from_slice(ds.row(i));
    }
    let ids = ds
        .source_ids()
        .map(|ids| keep.iter().map(|&i| ids[i].clone()).collect());
    let filtered = VectorDataset::new(keep.len(), ds.dim(), values, ids, ds.space_tag())?;
    Ok((filtered, n_dups, Vec::new()))
}

fn row_bits_hash<F: Real>(row: &[F]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in row {
        v.to_bits_u64().hash(&mut h);
    }
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecstore::SpaceTag;

    #[test]
    fn mk_hat_hand_arithmetic() {
        // T_j = e^j for j = 1..3, k = 3: log-sum mean = (2 + 1)/2, m-hat = 2/3
        let t = [1f64.exp(), 2f64.exp(), 3f64.exp()];
        let m = mk_hat(&t, 3).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-12, "{m}");
    }

    #[test]
    fn mk_hat_k2_reduction() {
        let t = [2.0, 6.0];
        let m = mk_hat(&t, 2).unwrap();
        assert!((m - 1.0 / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mk_hat_equal_distances_error() {
        assert!(matches!(mk_hat(&[1.0, 1.0, 1.0], 3), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn mk_hat_zero_distance_error() {
        assert!(matches!(mk_hat(&[0.0, 1.0, 2.0], 3), Err(Error::DuplicateDistance(1))));
    }

    #[test]
    fn duplicate_policy_error_lists_pair() {
        let mut values = vec![0f64; 0];
        for i in 0..30 {
            values.push(i as f64);
            values.push((i * i) as f64);
        }
        // row 5 duplicated at the end
        values.push(5.0);
        values.push(25.0);
        let ds =
            VectorDataset::new(31, 2, values, None, SpaceTag::ExternalEmbedding).unwrap();
        let cfg = IdConfig { k1: 2, k2: 3, duplicate_policy: DuplicatePolicy::Error };
        match estimate_id(&ds, &cfg) {
            Err(Error::DuplicateRows(n, pair)) => {
                assert_eq!(n, 1);
                assert_eq!(pair, (5, 30));
            }
            other => panic!("expected DuplicateRows, got {other:?}"),
        }
        // deduplicate_warn succeeds and drops the duplicate
        let cfg = IdConfig { duplicate_policy: DuplicatePolicy::DeduplicateWarn, ..cfg };
        let est = estimate_id(&ds, &cfg).unwrap();
        assert_eq!(est.n_used, 30);
        assert!(!est.warnings.is_empty());
    }

    #[test]
    fn too_few_points_names_requirement() {
        let ds = VectorDataset::new(
            5,
            1,
            vec![0.0, 1.0, 2.0, 4.0, 8.0],
            None,
            SpaceTag::ExternalEmbedding,
        )
        .unwrap();
        let cfg = IdConfig::default();
        assert!(matches!(
            estimate_id(&ds, &cfg),
            Err(Error::TooFewRows { required: 21, .. })
        ));
    }

    #[test]
    fn invalid_k_range_rejected() {
        let cfg = IdConfig { k1: 20, k2: 10, duplicate_policy: DuplicatePolicy::DeduplicateWarn };
        assert!(cfg.validate().is_err());
        let cfg = IdConfig { k1: 1, k2: 10, duplicate_policy: DuplicatePolicy::DeduplicateWarn };
        assert!(cfg.validate().is_err());
    }
}
