//! In-memory vector datasets: construction, z-score normalization,
//! deterministic subsampling, and the VDS binary format.

mod format;
mod image_ops;

pub use format::{read_vds, write_vds};
pub use image_ops::{center_crop_resize, downscale_rows, load_image_dir};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which vector space a dataset's rows live in. Distances are only
/// meaningful between datasets with matching tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    /// Raw pixel intensities in [0, 255].
    PixelRaw0255,
    /// Per-channel z-scored pixels.
    PixelZscored,
    /// Vectors produced by an external embedding model.
    ExternalEmbedding,
}

impl SpaceTag {
    pub fn code(self) -> u8 {
        match self {
            SpaceTag::PixelRaw0255 => 0,
            SpaceTag::PixelZscored => 1,
            SpaceTag::ExternalEmbedding => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(SpaceTag::PixelRaw0255),
            1 => Ok(SpaceTag::PixelZscored),
            2 => Ok(SpaceTag::ExternalEmbedding),
            other => Err(Error::Format(format!("unknown space_tag code {other}"))),
        }
    }
}

/// An immutable count x dim matrix of sample vectors, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorDataset<F: Real = f32> {
    count: usize,
    dim: usize,
    values: Vec<F>,
    source_ids: Option<Vec<String>>,
    space_tag: SpaceTag,
}

impl<F: Real> VectorDataset<F> {
    pub fn new(
        count: usize,
        dim: usize,
        values: Vec<F>,
        source_ids: Option<Vec<String>>,
        space_tag: SpaceTag,
    ) -> Result<Self> {
        if count == 0 || dim == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset must have count >= 1 and dim >= 1, got {count} x {dim}"
            )));
        }
        if values.len() != count * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {count} x {dim} dataset, got {}",
                count * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at flat index {pos} (row {}, col {})",
                pos / dim,
                pos % dim
            )));
        }
        if let Some(ids) = &source_ids {
            if ids.len() != count {
                return Err(Error::InvalidInput(format!(
                    "source_ids length {} does not match count {count}",
                    ids.len()
                )));
            }
        }
        Ok(Self { count, dim, values, source_ids, space_tag })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn source_ids(&self) -> Option<&[String]> {
        self.source_ids.as_deref()
    }

    /// Source id of row `i`, falling back to the row index.
    pub fn id_of(&self, i: usize) -> String {
        match &self.source_ids {
            Some(ids) => ids[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn space_tag(&self) -> SpaceTag {
        self.space_tag
    }

    /// Rows converted to f64 for distance accumulation.
    pub fn to_f64_matrix(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }

    pub fn rows_bit_equal(&self, i: usize, j: usize) -> bool {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .all(|(a, b)| a.to_bits_u64() == b.to_bits_u64())
    }

    /// `n` rows chosen uniformly without replacement by a seeded PRNG.
    /// Selected rows keep their original relative order.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > self.count {
            return Err(Error::InvalidInput(format!(
                "subsample size {n} out of range 1..={}",
                self.count
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices = rand::seq::index::sample(&mut rng, self.count, n).into_vec();
        indices.sort_unstable();

        let mut values = Vec::with_capacity(n * self.dim);
        for &i in &indices {
            values.extend_from_slice(self.row(i));
        }
        let source_ids = self
            .source_ids
            .as_ref()
            .map(|ids| indices.iter().map(|&i| ids[i].clone()).collect());
        Self::new(n, self.dim, values, source_ids, self.space_tag)
    }
}

/// Preprocessing configuration for image ingestion.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Side of the square output, in pixels.
    pub target_resolution: usize,
    /// Side used when downscaling for intrinsic-dimensionality estimation.
    pub id_resolution: usize,
    /// Whether to z-score normalize the ingested dataset.
    pub zscore: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { target_resolution: 128, id_resolution: 32, zscore: false }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_resolution == 0 || self.id_resolution == 0 {
            return Err(Error::InvalidInput("resolutions must be >= 1".into()));
        }
        if self.id_resolution > self.target_resolution {
            return Err(Error::InvalidInput(format!(
                "id_resolution {} exceeds target_resolution {}",
                self.id_resolution, self.target_resolution
            )));
        }
        Ok(())
    }
}

/// Per-channel mean and standard deviation over a whole dataset,
/// in raw 0-255 units.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Per-channel z-score normalization over all pixels of all samples.
///
/// Channel of a flattened element is its index modulo the channel count
/// (interleaved HWC layout). A zero-variance channel maps to all zeros and
/// records a warning instead of failing.
pub fn zscore_normalize<F: Real>(
    ds: &VectorDataset<F>,
    channels: usize,
) -> Result<(VectorDataset<F>, ChannelStats, Vec<String>)> {
    if ds.space_tag() != SpaceTag::PixelRaw0255 {
        return Err(Error::SpaceMismatch {
            left: ds.space_tag(),
            right: SpaceTag::PixelRaw0255,
        });
    }
    if channels == 0 || ds.dim % channels != 0 {
        return Err(Error::InvalidInput(format!(
            "dim {} is not a multiple of channel count {channels}",
            ds.dim
        )));
    }

    let stats = channel_stats(ds, channels);
    let mut warnings = Vec::new();
    for (ch, &s) in stats.std.iter().enumerate() {
        if s == 0.0 {
            warnings.push(format!(
                "channel {ch} has zero variance; mapped to all zeros"
            ));
        }
    }

    let values = apply_channel_stats(ds.values(), channels, &stats);
    let out = VectorDataset::new(
        ds.count,
        ds.dim,
        values,
        ds.source_ids.clone(),
        SpaceTag::PixelZscored,
    )?;
    Ok((out, stats, warnings))
}

/// Normalize raw values with previously recorded stats. Zero-std channels
/// map to zero.
pub fn apply_channel_stats<F: Real>(values: &[F], channels: usize, stats: &ChannelStats) -> Vec<F> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let ch = i % channels;
            if stats.std[ch] == 0.0 {
                F::zero()
            } else {
                F::from_f64_lossy((v.as_f64() - stats.mean[ch]) / stats.std[ch])
            }
        })
        .collect()
}

/// Invert [`apply_channel_stats`].
pub fn unapply_channel_stats<F: Real>(
    values: &[F],
    channels: usize,
    stats: &ChannelStats,
) -> Vec<F> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let ch = i % channels;
            F::from_f64_lossy(v.as_f64() * stats.std[ch] + stats.mean[ch])
        })
        .collect()
}

fn channel_stats<F: Real>(ds: &VectorDataset<F>, channels: usize) -> ChannelStats {
    let mut sum = vec![0.0f64; channels];
    let mut count = vec![0u64; channels];
    for (i, v) in ds.values().iter().enumerate() {
        sum[i % channels] += v.as_f64();
        count[i % channels] += 1;
    }
    let mean: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| s / c as f64)
        .collect();

    let mut sq = vec![0.0f64; channels];
    for (i, v) in ds.values().iter().enumerate() {
        let ch = i % channels;
        let d = v.as_f64() - mean[ch];
        sq[ch] += d * d;
    }
    let std: Vec<f64> = sq
        .iter()
        .zip(&count)
        .map(|(s, &c)| (s / c as f64).sqrt())
        .collect();

    ChannelStats { mean, std }
}
