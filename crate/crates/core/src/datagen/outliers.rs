use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierKind {
    Spike,
    Zero,
}

/// One replaced observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierEntry {
    pub index: usize,
    pub kind: OutlierKind,
    pub original: f64,
}

/// Replace `n_spikes` positions with values drawn uniformly in
/// `(1.5 * max, 3 * max)` of the column and `n_zeros` positions with zero.
/// Positions are sampled without replacement; the log is sorted by index.
pub fn inject_outliers(
    seq: &[f64],
    n_spikes: usize,
    n_zeros: usize,
    rng: &mut Rng,
) -> Result<(Vec<f64>, Vec<OutlierEntry>)> {
    let requested = n_spikes + n_zeros;
    if requested > seq.len() {
        return Err(Error::TooManyOutliers {
            requested,
            len: seq.len(),
        });
    }
    let mut out = seq.to_vec();
    if requested == 0 {
        return Ok((out, Vec::new()));
    }
    let max = seq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if n_spikes > 0 && !(max > 0.0) {
        return Err(Error::invalid("seq", "spikes need a positive column maximum"));
    }
    let positions = rand::seq::index::sample(rng, seq.len(), requested).into_vec();
    let mut log = Vec::with_capacity(requested);
    for (n, &index) in positions.iter().enumerate() {
        let kind = if n < n_spikes {
            OutlierKind::Spike
        } else {
            OutlierKind::Zero
        };
        out[index] = match kind {
            OutlierKind::Spike => loop {
                let v = rng.random_range(1.5 * max..3.0 * max);
                if v > 1.5 * max {
                    break v;
                }
            },
            OutlierKind::Zero => 0.0,
        };
        log.push(OutlierEntry {
            index,
            kind,
            original: seq[index],
        });
    }
    log.sort_by_key(|e| e.index);
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn nothing_to_inject() {
        let x = [1.0, 2.0, 3.0];
        let (y, log) = inject_outliers(&x, 0, 0, &mut stream(0, &[])).unwrap();
        assert_eq!(y, x);
        assert!(log.is_empty());
    }

    #[test]
    fn six_spikes_four_zeros() {
        let x: Vec<f64> = (0..400).map(|i| 10.0 + (i as f64 * 0.1).sin()).collect();
        let max = x.iter().copied().fold(f64::MIN, f64::max);
        let (y, log) = inject_outliers(&x, 6, 4, &mut stream(11, &[])).unwrap();
        let changed: Vec<usize> = (0..400).filter(|&i| x[i] != y[i]).collect();
        assert_eq!(changed.len(), 10);
        assert_eq!(y.iter().filter(|&&v| v > max).count(), 6);
        assert_eq!(y.iter().filter(|&&v| v == 0.0).count(), 4);
        assert_eq!(log.iter().map(|e| e.index).collect::<Vec<_>>(), changed);
        assert!(log.iter().all(|e| e.original == x[e.index]));
    }

    #[test]
    fn too_many() {
        assert!(matches!(
            inject_outliers(&[1.0, 2.0], 2, 1, &mut stream(0, &[])),
            Err(Error::TooManyOutliers { requested: 3, len: 2 })
        ));
    }
}
