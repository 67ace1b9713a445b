use serde::{Deserialize, Serialize};

use super::{Algorithm, ClusterAssignment};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    #[default]
    Average,
    Complete,
    Single,
}

/// Bottom-up merging until `k` clusters remain. Cluster distances are
/// updated with the Lance-Williams recurrences; among equal distances the
/// pair with the lowest (row, column) indices merges first.
pub fn agglomerative(d: &DistanceMatrix, k: usize, linkage: Linkage) -> Result<ClusterAssignment> {
    let n = d.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut dist: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| d.get(i, j)).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    // Each point's current cluster representative: its smallest member.
    let mut rep: Vec<usize> = (0..n).collect();
    for _ in 0..n - k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if dist[i * n + j] < best.0 {
                    best = (dist[i * n + j], i, j);
                }
            }
        }
        let (_, a, b) = best;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in (0..n).filter(|&c| active[c] && c != a && c != b) {
            let (dac, dbc) = (dist[a * n + c], dist[b * n + c]);
            let v = match linkage {
                Linkage::Average => (na * dac + nb * dbc) / (na + nb),
                Linkage::Complete => dac.max(dbc),
                Linkage::Single => dac.min(dbc),
            };
            dist[a * n + c] = v;
            dist[c * n + a] = v;
        }
        active[b] = false;
        size[a] += size[b];
        rep.iter_mut().filter(|r| **r == b).for_each(|r| *r = a);
    }
    ClusterAssignment::new(&rep, Algorithm::Agglomerative { linkage })
}
