//! Replication-percentage estimation: the fraction of generated samples
//! whose nearest training neighbor lies within a Euclidean threshold.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intrinsic_dim::{estimate_id, IdConfig};
use crate::knn;
use crate::scalar::Real;
use crate::vecstore::VectorDataset;

#[derive(Clone, Debug, Serialize)]
pub struct SampleMatch {
    pub generated_id: String,
    pub min_distance: f64,
    pub nearest_training_id: String,
    pub is_replication: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplicationReport {
    /// Threshold in the dataset's distance units.
    pub alpha: f64,
    pub n_generated: usize,
    /// Percent of generated samples with min distance <= alpha.
    pub percentage: f64,
    pub per_sample: Vec<SampleMatch>,
}

/// Ordered (alpha, percentage) pairs; percentage is non-decreasing in alpha.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaSweep {
    pub points: Vec<(f64, f64)>,
}

/// One subset-level measurement: complexity, size, replication percent.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReplicationPoint {
    pub mu1: f64,
    pub mu2: usize,
    pub percentage: f64,
}

fn percentage_at(distances: &[f64], alpha: f64) -> f64 {
    let hits = distances.iter().filter(|&&d| d <= alpha).count();
    100.0 * hits as f64 / distances.len() as f64
}

/// Estimate the replication percentage of `generated` against `training`
/// at threshold `alpha`, with a per-sample nearest-match manifest.
pub fn replication_percentage<F: Real>(
    generated: &VectorDataset<F>,
    training: &VectorDataset<F>,
    alpha: f64,
) -> Result<ReplicationReport> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
    }
    let nn = knn::min_distances(generated, training)?;
    let per_sample = (0..generated.count())
        .map(|i| SampleMatch {
            generated_id: generated.id_of(i),
            min_distance: nn.distances[i],
            nearest_training_id: training.id_of(nn.indices[i]),
            is_replication: nn.distances[i] <= alpha,
        })
        .collect();
    Ok(ReplicationReport {
        alpha,
        n_generated: generated.count(),
        percentage: percentage_at(&nn.distances, alpha),
        per_sample,
    })
}

/// Threshold sweep: min distances are computed once and thresholded at
/// each alpha. `alphas` must be strictly ascending and non-negative.
pub fn alpha_sweep<F: Real>(
    generated: &VectorDataset<F>,
    training: &VectorDataset<F>,
    alphas: &[f64],
) -> Result<AlphaSweep> {
    if alphas.is_empty() {
        return Err(Error::InvalidInput("alpha sweep needs at least one threshold".into()));
    }
    if !(alphas[0] >= 0.0) {
        return Err(Error::InvalidInput("alphas must be >= 0".into()));
    }
    if alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("alphas must be strictly ascending".into()));
    }
    let nn = knn::min_distances(generated, training)?;
    Ok(AlphaSweep {
        points: alphas
            .iter()
            .map(|&a| (a, percentage_at(&nn.distances, a)))
            .collect(),
    })
}

/// One subset-level experiment to be turned into a scatter point.
pub struct ExperimentLevel<'a, F: Real> {
    pub training: &'a VectorDataset<F>,
    pub generated: &'a VectorDataset<F>,
    /// Dataset used for the ID estimate (e.g. a downscaled copy of
    /// `training`). Defaults to `training`.
    pub id_input: Option<&'a VectorDataset<F>>,
    pub alpha: f64,
}

/// Compute (mu1, mu2, percentage) for each subset level; these are the
/// scatter points the decay models are fitted to.
pub fn sample_replication_points<F: Real>(
    levels: &[ExperimentLevel<'_, F>],
    id_cfg: &IdConfig,
) -> Result<Vec<ReplicationPoint>> {
    levels
        .iter()
        .map(|level| {
            let id_ds = level.id_input.unwrap_or(level.training);
            let id = estimate_id(id_ds, id_cfg)?;
            let report = replication_percentage(level.generated, level.training, level.alpha)?;
            Ok(ReplicationPoint {
                mu1: id.value,
                mu2: level.training.count(),
                percentage: report.percentage,
            })
        })
        .collect()
}
