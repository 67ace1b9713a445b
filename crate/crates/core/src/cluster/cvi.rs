use rand::seq::index::sample;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Point pairs above which the Gamma index works on a sample.
pub const DEFAULT_MAX_PAIRS: usize = 100_000;

fn cluster_count(d: &DistanceMatrix, labels: &[usize]) -> Result<usize> {
    if labels.len() != d.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: d.len(),
        });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; k];
    labels.iter().for_each(|&l| seen[l] = true);
    match seen.iter().filter(|&&s| s).count() {
        0 | 1 => Err(Error::SingleCluster),
        _ => Ok(k),
    }
}

/// Mean silhouette width. Points alone in their cluster score 0.
pub fn silhouette(d: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
    let k = cluster_count(d, labels)?;
    let n = d.len();
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            sums[labels[j]] += d.get(i, j);
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

/// Smallest between-cluster distance over largest within-cluster distance.
/// Infinite when every cluster has zero diameter.
pub fn dunn(d: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
    cluster_count(d, labels)?;
    let n = d.len();
    let (mut sep, mut diam) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        for j in i + 1..n {
            let v = d.get(i, j);
            if labels[i] == labels[j] {
                diam = diam.max(v);
            } else {
                sep = sep.min(v);
            }
        }
    }
    Ok(if diam == 0.0 { f64::INFINITY } else { sep / diam })
}

/// Baker-Hubert Gamma: (concordant - discordant) / (concordant + discordant)
/// over (within pair, between pair) comparisons. When the number of point
/// pairs exceeds `max_pairs`, a seeded sample of `max_pairs` pairs is used.
/// Zero when either side has no pairs.
pub fn gamma_index(d: &DistanceMatrix, labels: &[usize], max_pairs: usize, seed: u64) -> Result<f64> {
    cluster_count(d, labels)?;
    let n = d.len();
    let total = n * (n - 1) / 2;
    let mut within = Vec::new();
    let mut between = Vec::new();
    let mut push = |i: usize, j: usize| {
        if labels[i] == labels[j] {
            within.push(d.get(i, j));
        } else {
            between.push(d.get(i, j));
        }
    };
    if total <= max_pairs {
        for i in 0..n {
            for j in i + 1..n {
                push(i, j);
            }
        }
    } else {
        let mut picks = sample(&mut stream(seed, &[0x6a]), total, max_pairs.max(1)).into_vec();
        picks.sort_unstable();
        let (mut i, mut row_start) = (0, 0);
        for p in picks {
            while p >= row_start + (n - 1 - i) {
                row_start += n - 1 - i;
                i += 1;
            }
            push(i, i + 1 + p - row_start);
        }
    }
    between.sort_by(f64::total_cmp);
    let (mut plus, mut minus) = (0u64, 0u64);
    for w in within {
        minus += between.partition_point(|&b| b < w) as u64;
        plus += (between.len() - between.partition_point(|&b| b <= w)) as u64;
    }
    if plus + minus == 0 {
        return Ok(0.0);
    }
    Ok((plus as f64 - minus as f64) / (plus + minus) as f64)
}
