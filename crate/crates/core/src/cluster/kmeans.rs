use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Algorithm, ClusterAssignment};
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub seed: u64,
    pub max_iter: usize,
    pub n_init: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iter: 300,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: ClusterAssignment,
    /// Indexed by canonical label.
    pub centroids: Vec<Vec<f64>>,
    pub wcss: f64,
    /// WCSS after every Lloyd iteration of the winning run.
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Within-cluster sum of squared distances to cluster means.
pub fn wcss(rows: &[Vec<f64>], labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let c = means(rows, labels, k);
    rows.iter().zip(labels).map(|(r, &l)| sq_dist(r, &c[l])).sum()
}

fn means(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut crate::rng::Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centroids.push(rows[pick].clone());
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn lloyd(rows: &[Vec<f64>], k: usize, max_iter: usize, rng: &mut crate::rng::Rng) -> (Vec<usize>, Vec<f64>) {
    let mut centroids = plus_plus(rows, k, rng);
    let mut labels = vec![usize::MAX; rows.len()];
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let mut changed = false;
        let mut dist = vec![0.0; rows.len()];
        for (i, r) in rows.iter().enumerate() {
            let (j, d) = nearest(r, &centroids);
            dist[i] = d;
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
        }
        // An empty cluster takes the point farthest from its centroid
        // among clusters that can spare one.
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            let far = (0..rows.len())
                .filter(|&i| counts[labels[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                })
                .expect("k <= n leaves a cluster with two points");
            counts[labels[far]] -= 1;
            counts[empty] = 1;
            labels[far] = empty;
            dist[far] = 0.0;
            changed = true;
        }
        centroids = means(rows, &labels, k);
        history.push(rows.iter().zip(&labels).map(|(r, &l)| sq_dist(r, &centroids[l])).sum());
        if !changed {
            break;
        }
    }
    (labels, history)
}

/// Lloyd's algorithm with k-means++ seeding, best of `n_init` runs by WCSS.
/// Each run draws from its own seeded stream.
pub fn kmeans(rows: &[Vec<f64>], k: usize, cfg: &KMeansConfig) -> Result<KMeansFit> {
    let n = rows.len();
    if n == 0 || rows[0].is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::ShapeMismatch("ragged feature rows".into()));
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for init in 0..cfg.n_init.max(1) {
        let mut rng = stream(cfg.seed, &[init as u64]);
        let (labels, history) = lloyd(rows, k, cfg.max_iter.max(1), &mut rng);
        let w = *history.last().expect("at least one iteration");
        if best.as_ref().is_none_or(|b| w < b.0) {
            best = Some((w, labels, history));
        }
    }
    let (w, labels, history) = best.expect("n_init >= 1");
    let assignment = ClusterAssignment::new(&labels, Algorithm::KMeans)?;
    let centroids = means(rows, &assignment.labels, k);
    Ok(KMeansFit {
        assignment,
        centroids,
        wcss: w,
        history,
    })
}
