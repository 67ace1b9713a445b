//! Clustering-assisted neural forecasting of multivariate time series.
//!
//! The pipeline generates (or loads) a dataset of multivariate series,
//! removes additive outliers, optionally groups the series by DTW distance
//! or by extracted features, trains recurrent and dense forecasters per
//! group, and aggregates the per-group errors into size-weighted totals.

pub mod cluster;
pub mod datagen;
pub mod distance;
pub mod error;
pub mod exec;
pub mod features;
pub mod forecast;
pub mod harness;
pub mod metrics;
pub mod preprocess;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
