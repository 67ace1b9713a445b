//! Forecast error measures and the cluster-size weighted total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MAE, RMSE and MAPE (percent) for one set of forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTriple {
    pub mae: f64,
    pub rmse: f64,
    pub mape: f64,
}

impl ErrorTriple {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        Ok(Self {
            mae: mae(actual, predicted)?,
            rmse: rmse(actual, predicted)?,
            mape: mape(actual, predicted)?,
        })
    }

    /// Component-wise mean of several triples.
    pub fn mean(triples: &[ErrorTriple]) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = triples.len() as f64;
        Ok(Self {
            mae: triples.iter().map(|t| t.mae).sum::<f64>() / n,
            rmse: triples.iter().map(|t| t.rmse).sum::<f64>() / n,
            mape: triples.iter().map(|t| t.mape).sum::<f64>() / n,
        })
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Mae => self.mae,
            Metric::Rmse => self.rmse,
            Metric::Mape => self.mape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Rmse,
    Mape,
    Mae,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Rmse, Metric::Mape, Metric::Mae];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mae => "MAE",
            Metric::Rmse => "RMSE",
            Metric::Mape => "MAPE",
        }
    }
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Forecast errors `actual - predicted`.
pub fn errors(actual: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    check(actual, predicted)?;
    Ok(actual.iter().zip(predicted).map(|(y, p)| y - p).collect())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    let e = errors(actual, predicted)?;
    Ok(e.iter().map(|v| v.abs()).sum::<f64>() / e.len() as f64)
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    let e = errors(actual, predicted)?;
    Ok((e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64).sqrt())
}

/// Mean absolute percentage error. Undefined when any actual value is zero.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    let e = errors(actual, predicted)?;
    if let Some(i) = actual.iter().position(|&y| y == 0.0) {
        return Err(Error::UndefinedAtZero(i));
    }
    Ok(e.iter()
        .zip(actual)
        .map(|(e, y)| (100.0 * e / y).abs())
        .sum::<f64>()
        / e.len() as f64)
}

/// Cluster sizes; each cluster is weighted by its share of the records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterWeights {
    sizes: Vec<usize>,
}

impl ClusterWeights {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::EmptyInput);
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("cluster_size", "every cluster must be non-empty"));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.sizes.iter().map(|&s| s as f64 / total).collect()
    }
}

/// Total error as the size-weighted average of per-cluster errors.
pub fn weighted_total(weights: &ClusterWeights, per_cluster: &[f64]) -> Result<f64> {
    if per_cluster.len() != weights.sizes.len() {
        return Err(Error::LengthMismatch {
            left: weights.sizes.len(),
            right: per_cluster.len(),
        });
    }
    Ok(weights
        .probabilities()
        .iter()
        .zip(per_cluster)
        .map(|(p, e)| p * e)
        .sum())
}
