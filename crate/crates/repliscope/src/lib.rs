//! Toolkit for measuring GAN training-data replication and predicting
//! the dataset size needed to keep it below a target.
//!
//! The pipeline: ingest images or vectors ([`vecstore`]), run exact
//! nearest-neighbor queries ([`knn`]), estimate intrinsic dimensionality
//! ([`intrinsic_dim`]), measure replication percentages ([`replication`]),
//! fit the exponential decay/growth model family ([`decay_models`]), and
//! extrapolate from few measurements ([`predictor`]).

pub mod cli;
pub mod decay_models;
pub mod error;
pub mod intrinsic_dim;
pub mod knn;
pub mod predictor;
pub mod replication;
pub mod scalar;
pub mod vecstore;

pub use error::{Error, Result};
pub use scalar::Real;

/// The pixel pipeline's dataset type (f32 storage, as persisted in VDS).
pub type PixelDataset = vecstore::VectorDataset<f32>;
/// Dataset with f64 storage, used for synthetic numeric experiments.
pub type DenseDataset = vecstore::VectorDataset<f64>;
