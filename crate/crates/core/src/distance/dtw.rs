use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A borrowed sequence of `dim`-dimensional points stored time-major.
#[derive(Debug, Clone, Copy)]
pub struct PointSeq<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> PointSeq<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        if data.len() % dim != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn univariate(data: &'a [f64]) -> Result<Self> {
        Self::new(data, 1)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Local cost between two points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalCost {
    /// Sum of absolute coordinate differences.
    #[default]
    Absolute,
    /// Sum of squared coordinate differences.
    Squared,
}

impl LocalCost {
    #[inline]
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            LocalCost::Absolute => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            LocalCost::Squared => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
        }
    }
}

fn check(a: &PointSeq, b: &PointSeq) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(())
}

/// Straight-line distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Full DTW with absolute local cost.
pub fn dtw(a: PointSeq, b: PointSeq) -> Result<f64> {
    dtw_with_cost(a, b, LocalCost::Absolute)
}

/// Full O(m n) DTW over steps (1,0), (0,1), (1,1), keeping two rows.
pub fn dtw_with_cost(a: PointSeq, b: PointSeq, cost: LocalCost) -> Result<f64> {
    check(&a, &b)?;
    let n = b.len();
    let mut prev = vec![f64::INFINITY; n];
    let mut cur = vec![f64::INFINITY; n];
    for i in 0..a.len() {
        let x = a.point(i);
        for j in 0..n {
            let c = cost.eval(x, b.point(j));
            cur[j] = c + best_predecessor(i, j, &prev, &cur);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n - 1])
}

/// Minimum accumulated cost among the predecessors of cell (i, j), reading
/// row i-1 from `prev` and row i (columns < j) from `cur`.
#[inline]
fn best_predecessor(i: usize, j: usize, prev: &[f64], cur: &[f64]) -> f64 {
    match (i, j) {
        (0, 0) => 0.0,
        (0, _) => cur[j - 1],
        (_, 0) => prev[0],
        _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
    }
}

/// Inclusive column range allowed in each row of a Sakoe-Chiba band of
/// radius `r` around the diagonal joining (0, 0) and (m-1, n-1).
///
/// Rows are widened so that consecutive rows touch, which keeps the end cell
/// reachable; widening uses the radius-0 start of the next row so that the
/// band only grows with `r`.
pub fn band_limits(m: usize, n: usize, r: usize) -> Vec<(usize, usize)> {
    let slope = if m > 1 {
        (n - 1) as f64 / (m - 1) as f64
    } else {
        0.0
    };
    let r = r as f64;
    let center = |i: usize| i as f64 * slope;
    (0..m)
        .map(|i| {
            let lo = (center(i) - r).ceil().max(0.0) as usize;
            let mut hi = ((center(i) + r).floor() as usize).min(n - 1);
            if i + 1 < m {
                hi = hi.max((center(i + 1).ceil() as usize).saturating_sub(1));
            } else {
                hi = n - 1;
            }
            (lo.min(hi), hi.min(n - 1))
        })
        .collect()
}

/// DTW restricted to a Sakoe-Chiba band. Always at least the full DTW, and
/// equal to it once `band_radius >= max(m, n)`.
pub fn dtw_banded(a: PointSeq, b: PointSeq, band_radius: usize) -> Result<f64> {
    dtw_banded_with_cost(a, b, band_radius, LocalCost::Absolute)
}

pub fn dtw_banded_with_cost(
    a: PointSeq,
    b: PointSeq,
    band_radius: usize,
    cost: LocalCost,
) -> Result<f64> {
    check(&a, &b)?;
    let (m, n) = (a.len(), b.len());
    let limits = band_limits(m, n, band_radius);
    let mut prev = vec![f64::INFINITY; n];
    let mut cur = vec![f64::INFINITY; n];
    for (i, &(lo, hi)) in limits.iter().enumerate() {
        let x = a.point(i);
        cur.iter_mut().for_each(|v| *v = f64::INFINITY);
        for j in lo..=hi {
            let c = cost.eval(x, b.point(j));
            cur[j] = c + best_predecessor(i, j, &prev, &cur);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n - 1])
}

/// Full-matrix DTW that also recovers one optimal warping path.
pub fn dtw_with_path(a: PointSeq, b: PointSeq, cost: LocalCost) -> Result<(f64, Vec<(usize, usize)>)> {
    check(&a, &b)?;
    let (m, n) = (a.len(), b.len());
    let mut acc = vec![f64::INFINITY; m * n];
    for i in 0..m {
        for j in 0..n {
            let c = cost.eval(a.point(i), b.point(j));
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => acc[j - 1],
                (_, 0) => acc[(i - 1) * n],
                _ => acc[(i - 1) * n + j]
                    .min(acc[i * n + j - 1])
                    .min(acc[(i - 1) * n + j - 1]),
            };
            acc[i * n + j] = c + best;
        }
    }
    let mut path = vec![(m - 1, n - 1)];
    let (mut i, mut j) = (m - 1, n - 1);
    while (i, j) != (0, 0) {
        (i, j) = match (i, j) {
            (0, _) => (0, j - 1),
            (_, 0) => (i - 1, 0),
            _ => {
                let diag = acc[(i - 1) * n + j - 1];
                let up = acc[(i - 1) * n + j];
                let left = acc[i * n + j - 1];
                if diag <= up && diag <= left {
                    (i - 1, j - 1)
                } else if up <= left {
                    (i - 1, j)
                } else {
                    (i, j - 1)
                }
            }
        };
        path.push((i, j));
    }
    path.reverse();
    Ok((acc[m * n - 1], path))
}
