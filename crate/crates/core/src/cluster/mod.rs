//! Partitioning of records: k-means on feature rows, agglomerative
//! clustering on distance matrices, validity indexes and choice of k.

mod cvi;
mod hierarchy;
mod kmeans;

pub use cvi::{dunn, gamma_index, silhouette, DEFAULT_MAX_PAIRS};
pub use hierarchy::{agglomerative, Linkage};
pub use kmeans::{kmeans, wcss, KMeansConfig, KMeansFit};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "algorithm")]
pub enum Algorithm {
    /// Everything in one cluster.
    Single,
    KMeans,
    Agglomerative { linkage: Linkage },
}

/// Labels in `[0, k)`, numbered by each cluster's smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub algorithm: Algorithm,
    pub sizes: Vec<usize>,
}

impl ClusterAssignment {
    /// Relabels canonically. Fails if `labels` is empty.
    pub fn new(labels: &[usize], algorithm: Algorithm) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut map = std::collections::HashMap::new();
        let labels: Vec<usize> = labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        let k = map.len();
        let mut sizes = vec![0; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        Ok(Self {
            labels,
            k,
            algorithm,
            sizes,
        })
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(&vec![0; n], Algorithm::Single)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Record indices of cluster `c`, ascending.
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == c).collect()
    }

    /// Writes `record_id,cluster` rows.
    pub fn write_csv<W: Write>(&self, out: W, record_ids: &[String]) -> Result<()> {
        if record_ids.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: record_ids.len(),
                right: self.len(),
            });
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["record_id", "cluster"])?;
        for (id, l) in record_ids.iter().zip(&self.labels) {
            w.write_record([id.as_str(), &l.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// What to cluster: a precomputed distance matrix (agglomerative) or
/// standardized feature rows (k-means, with Euclidean CVIs).
#[derive(Debug, Clone, Copy)]
pub enum ClusterInput<'a> {
    Distances {
        dmatrix: &'a DistanceMatrix,
        linkage: Linkage,
    },
    Features {
        rows: &'a [Vec<f64>],
        dmatrix: &'a DistanceMatrix,
    },
}

impl ClusterInput<'_> {
    fn dmatrix(&self) -> &DistanceMatrix {
        match self {
            ClusterInput::Distances { dmatrix, .. } | ClusterInput::Features { dmatrix, .. } => dmatrix,
        }
    }

    fn fit(&self, k: usize, seed: u64) -> Result<ClusterAssignment> {
        match *self {
            ClusterInput::Distances { dmatrix, linkage } => agglomerative(dmatrix, k, linkage),
            ClusterInput::Features { rows, .. } => {
                let cfg = KMeansConfig {
                    seed,
                    ..KMeansConfig::default()
                };
                Ok(kmeans(rows, k, &cfg)?.assignment)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CviRow {
    pub k: usize,
    pub silhouette: f64,
    pub dunn: f64,
    pub gamma: f64,
    pub sizes: Vec<usize>,
    /// False when some cluster is below the minimum size.
    pub eligible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub k: usize,
    pub assignment: ClusterAssignment,
    pub table: Vec<CviRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    /// Candidates with a smaller cluster are not eligible. If none is
    /// eligible the selection falls back to a single cluster.
    pub min_cluster_size: usize,
    pub max_pairs: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 6,
            seed: 0,
            min_cluster_size: 1,
            max_pairs: DEFAULT_MAX_PAIRS,
        }
    }
}

/// Fits every k in range and keeps the best silhouette (ties to smaller k).
pub fn select_k(input: ClusterInput, cfg: &SelectConfig, exec: Execution) -> Result<Selection> {
    let d = input.dmatrix();
    let n = d.len();
    if cfg.k_min < 2 || cfg.k_min > cfg.k_max {
        return Err(Error::invalid("k_range", "need 2 <= k_min <= k_max"));
    }
    if cfg.k_max > n {
        return Err(Error::KTooLarge { k: cfg.k_max, n });
    }
    let ks: Vec<usize> = (cfg.k_min..=cfg.k_max).collect();
    let fits = exec::map_slice(exec, &ks, |&k| {
        let a = input.fit(k, cfg.seed)?;
        let row = CviRow {
            k,
            silhouette: silhouette(d, &a.labels)?,
            dunn: dunn(d, &a.labels)?,
            gamma: gamma_index(d, &a.labels, cfg.max_pairs, cfg.seed)?,
            eligible: a.sizes.iter().all(|&s| s >= cfg.min_cluster_size),
            sizes: a.sizes.clone(),
        };
        Ok::<_, Error>((a, row))
    });
    let mut best: Option<(f64, ClusterAssignment)> = None;
    let mut table = Vec::with_capacity(ks.len());
    for f in fits {
        let (a, row) = f?;
        if row.eligible && best.as_ref().is_none_or(|(s, _)| row.silhouette > *s) {
            best = Some((row.silhouette, a));
        }
        table.push(row);
    }
    let assignment = match best {
        Some((_, a)) => a,
        None => {
            log::warn!("no k meets min cluster size {}; using one cluster", cfg.min_cluster_size);
            ClusterAssignment::single(n)?
        }
    };
    Ok(Selection {
        k: assignment.k,
        assignment,
        table,
    })
}

#[cfg(test)]
pub(crate) mod blobs {
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    use crate::rng::stream;

    pub fn make(centers: &[[f64; 2]], per: usize, std: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = stream(seed, &[]);
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per {
                rows.push(
                    center
                        .iter()
                        .map(|m| m + std * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                );
                truth.push(c);
            }
        }
        (rows, truth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: &[Vec<f64>]) -> DistanceMatrix {
        DistanceMatrix::from_rows(rows, Execution::Sequential).unwrap()
    }

    #[test]
    fn canonical_labels() {
        let a = ClusterAssignment::new(&[5, 5, 2, 9, 2], Algorithm::KMeans).unwrap();
        assert_eq!(a.labels, vec![0, 0, 1, 2, 1]);
        assert_eq!(a.sizes, vec![2, 2, 1]);
        assert_eq!(a.members(1), vec![2, 4]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf, &["a", "b", "c", "d", "e"].map(String::from)).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("record_id,cluster\na,0\n"));
    }

    #[test]
    fn selects_three_blobs() {
        let (rows, _) = blobs::make(&[[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]], 20, 1.0, 3);
        let d = dm(&rows);
        let cfg = SelectConfig::default();
        for input in [
            ClusterInput::Features { rows: &rows, dmatrix: &d },
            ClusterInput::Distances {
                dmatrix: &d,
                linkage: Linkage::Average,
            },
        ] {
            let s = select_k(input, &cfg, Execution::Parallel).unwrap();
            assert_eq!(s.k, 3);
            assert_eq!(s.table.len(), 5);
        }
    }

    #[test]
    fn selects_two_blobs_and_trivial_range() {
        let (rows, _) = blobs::make(&[[0.0, 0.0], [30.0, 30.0]], 15, 1.0, 4);
        let d = dm(&rows);
        let input = ClusterInput::Features { rows: &rows, dmatrix: &d };
        assert_eq!(select_k(input, &SelectConfig::default(), Execution::Sequential).unwrap().k, 2);
        let cfg = SelectConfig {
            k_min: 2,
            k_max: 2,
            ..SelectConfig::default()
        };
        let s = select_k(input, &cfg, Execution::Sequential).unwrap();
        assert_eq!((s.k, s.table.len()), (2, 1));
    }

    #[test]
    fn min_size_falls_back_to_single() {
        let (rows, _) = blobs::make(&[[0.0, 0.0], [30.0, 30.0]], 4, 1.0, 4);
        let d = dm(&rows);
        let cfg = SelectConfig {
            k_max: 3,
            min_cluster_size: 5,
            ..SelectConfig::default()
        };
        let s = select_k(ClusterInput::Features { rows: &rows, dmatrix: &d }, &cfg, Execution::Sequential).unwrap();
        assert_eq!(s.k, 1);
        assert_eq!(s.assignment.algorithm, Algorithm::Single);
        let bad = SelectConfig {
            k_max: 9,
            ..SelectConfig::default()
        };
        assert!(matches!(
            select_k(ClusterInput::Features { rows: &rows, dmatrix: &d }, &bad, Execution::Sequential),
            Err(Error::KTooLarge { .. })
        ));
    }
}
