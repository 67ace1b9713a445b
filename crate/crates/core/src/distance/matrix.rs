use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::dtw::{dtw_banded_with_cost, dtw_with_cost, euclidean, LocalCost, PointSeq};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistanceMetric {
    Dtw { cost: LocalCost },
    DtwBanded { radius: usize, cost: LocalCost },
    Euclidean,
}

impl DistanceMetric {
    pub fn dtw() -> Self {
        DistanceMetric::Dtw {
            cost: LocalCost::Absolute,
        }
    }

    pub fn eval(&self, a: PointSeq, b: PointSeq) -> Result<f64> {
        match *self {
            DistanceMetric::Dtw { cost } => dtw_with_cost(a, b, cost),
            DistanceMetric::DtwBanded { radius, cost } => dtw_banded_with_cost(a, b, radius, cost),
            DistanceMetric::Euclidean => {
                if a.dim() != b.dim() {
                    return Err(Error::DimensionMismatch {
                        left: a.dim(),
                        right: b.dim(),
                    });
                }
                let flat = |s: PointSeq| (0..s.len()).flat_map(move |i| s.point(i).iter().copied()).collect::<Vec<_>>();
                euclidean(&flat(a), &flat(b))
            }
        }
    }
}

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    pub metric: Option<DistanceMetric>,
    /// Wall-clock seconds spent filling the matrix.
    pub seconds: f64,
}

impl DistanceMatrix {
    /// Wrap a full row-major `n x n` matrix, checking symmetry and diagonal.
    pub fn from_full(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} values for {n}x{n}", values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::invalid("dmatrix", "diagonal must be zero"));
            }
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !(a >= 0.0) || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::invalid("dmatrix", "must be symmetric and non-negative"));
                }
            }
        }
        Ok(Self {
            n,
            values,
            metric: None,
            seconds: 0.0,
        })
    }

    /// Euclidean distances between the rows of a matrix.
    pub fn from_rows<R: AsRef<[f64]> + Sync>(rows: &[R], exec: Execution) -> Result<Self> {
        let seqs = rows
            .iter()
            .map(|r| PointSeq::new(r.as_ref(), r.as_ref().len().max(1)))
            .collect::<Result<Vec<_>>>()?;
        distance_matrix_with(&seqs, DistanceMetric::Euclidean, exec)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// Pairwise distances on the rayon pool.
pub fn distance_matrix(records: &[PointSeq], metric: DistanceMetric) -> Result<DistanceMatrix> {
    distance_matrix_with(records, metric, Execution::Parallel)
}

/// Pairwise distances; only the upper triangle is evaluated and mirrored.
pub fn distance_matrix_with(
    records: &[PointSeq],
    metric: DistanceMetric,
    exec: Execution,
) -> Result<DistanceMatrix> {
    let start = Instant::now();
    let n = records.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let dists = exec::map_slice(exec, &pairs, |&(i, j)| metric.eval(records[i], records[j]));
    let mut values = vec![0.0; n * n];
    for (&(i, j), d) in pairs.iter().zip(dists) {
        let d = d?;
        values[i * n + j] = d;
        values[j * n + i] = d;
    }
    Ok(DistanceMatrix {
        n,
        values,
        metric: Some(metric),
        seconds: start.elapsed().as_secs_f64(),
    })
}
