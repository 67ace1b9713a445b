use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SPAN: f64 = 0.25;

/// Locally weighted linear regression (tricube weights) evaluated at every
/// index. Each fit uses the `ceil(span * n)` nearest indices (at least 3).
pub fn loess_smooth(seq: &[f64], span: f64) -> Result<Vec<f64>> {
    let n = seq.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::BadSpan(span));
    }
    let k = ((span * n as f64).ceil() as usize).clamp(3, n);
    let mut out = Vec::with_capacity(n);
    let mut weights = vec![0.0; k];
    for i in 0..n {
        let lo = i.saturating_sub(k / 2).min(n - k);
        let hi = lo + k;
        let h = (i - lo).max(hi - 1 - i) as f64;
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for (j, w) in (lo..hi).zip(weights.iter_mut()) {
            let d = (j as f64 - i as f64).abs() / h;
            *w = if d < 1.0 { (1.0 - d * d * d).powi(3) } else { 0.0 };
            sw += *w;
            sx += *w * j as f64;
            sy += *w * seq[j];
        }
        let xm = sx / sw;
        let ym = sy / sw;
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (j, w) in (lo..hi).zip(&weights) {
            let dx = j as f64 - xm;
            sxx += w * dx * dx;
            sxy += w * dx * (seq[j] - ym);
        }
        let fitted = if sxx > 0.0 {
            ym + sxy / sxx * (i as f64 - xm)
        } else {
            ym
        };
        out.push(fitted);
    }
    Ok(out)
}

/// Additive split of a series into trend, seasonal and remainder parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
}

/// Loess trend plus, when `period` is given, a seasonal component of
/// per-phase means of the detrended series centered to sum to zero over one
/// period.
pub fn decompose(seq: &[f64], period: Option<usize>, span: f64) -> Result<Decomposition> {
    let n = seq.len();
    if let Some(p) = period {
        if p == 0 {
            return Err(Error::invalid("period", "must be positive"));
        }
        if n < 2 * p {
            return Err(Error::TooShort { needed: 2 * p, got: n });
        }
    }
    let trend = loess_smooth(seq, span)?;
    let seasonal = match period {
        None => vec![0.0; n],
        Some(p) => {
            let mut sums = vec![0.0; p];
            let mut counts = vec![0usize; p];
            for (i, (x, t)) in seq.iter().zip(&trend).enumerate() {
                sums[i % p] += x - t;
                counts[i % p] += 1;
            }
            let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
            let center = means.iter().sum::<f64>() / p as f64;
            (0..n).map(|i| means[i % p] - center).collect()
        }
    };
    let remainder = seq
        .iter()
        .zip(&trend)
        .zip(&seasonal)
        .map(|((x, t), s)| x - t - s)
        .collect();
    Ok(Decomposition {
        trend,
        seasonal,
        remainder,
    })
}
