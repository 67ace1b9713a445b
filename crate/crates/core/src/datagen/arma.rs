use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Whether `1 - a_1 z - ... - a_p z^p` has all roots outside the unit circle.
///
/// Runs the Durbin-Levinson recursion backwards: the polynomial is stable iff
/// every partial autocorrelation it implies has magnitude below one.
pub fn is_stationary(ar: &[f64]) -> bool {
    let mut coeffs = ar.to_vec();
    while let Some(&k) = coeffs.last() {
        if !k.is_finite() || k.abs() >= 1.0 {
            return false;
        }
        let p = coeffs.len();
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (0..p - 1)
            .map(|j| (coeffs[j] + k * coeffs[p - 2 - j]) / denom)
            .collect();
        coeffs = prev;
    }
    true
}

/// Whether `1 + b_1 z + ... + b_q z^q` has all roots outside the unit circle.
pub fn is_invertible(ma: &[f64]) -> bool {
    let negated: Vec<f64> = ma.iter().map(|b| -b).collect();
    is_stationary(&negated)
}

/// Draw ARMA orders uniformly from the inclusive ranges and coefficients
/// uniformly in (-1, 1), rejecting non-stationary AR or non-invertible MA
/// polynomials.
pub fn random_arma(
    rng: &mut Rng,
    ar_order: (usize, usize),
    ma_order: (usize, usize),
) -> (Vec<f64>, Vec<f64>) {
    let p = rng.random_range(ar_order.0..=ar_order.1);
    let q = rng.random_range(ma_order.0..=ma_order.1);
    let ar = loop {
        let c: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        if is_stationary(&c) {
            break c;
        }
    };
    let ma = loop {
        let c: Vec<f64> = (0..q).map(|_| rng.random_range(-1.0..1.0)).collect();
        if is_invertible(&c) {
            break c;
        }
    };
    (ar, ma)
}

/// Simulate an ARMA(p, q) process with Gaussian innovations of standard
/// deviation `noise_std`, discarding a burn-in of `10 * max(p, q)` samples.
pub fn simulate_arima(
    ar: &[f64],
    ma: &[f64],
    length: usize,
    noise_std: f64,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if !is_stationary(ar) {
        return Err(Error::NonStationary(ar.to_vec()));
    }
    if length == 0 {
        return Err(Error::invalid("length", "must be positive"));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::invalid("noise_std", format!("{noise_std}")));
    }
    let burn = 10 * ar.len().max(ma.len());
    let total = burn + length;
    let mut x = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        e[t] = if noise_std > 0.0 {
            noise_std * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let mut v = e[t];
        for (j, a) in ar.iter().enumerate() {
            if t > j {
                v += a * x[t - j - 1];
            }
        }
        for (j, b) in ma.iter().enumerate() {
            if t > j {
                v += b * e[t - j - 1];
            }
        }
        x[t] = v;
    }
    x.drain(..burn);
    Ok(x)
}

/// Take absolute values, then map affinely onto `[target_min, target_max]`.
pub fn rescale_positive(seq: &[f64], target_min: f64, target_max: f64) -> Result<Vec<f64>> {
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(target_min < target_max) {
        return Err(Error::invalid("range", format!("({target_min}, {target_max})")));
    }
    let abs: Vec<f64> = seq.iter().map(|v| v.abs()).collect();
    let lo = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = abs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::DegenerateRange);
    }
    let scale = (target_max - target_min) / span;
    Ok(abs.iter().map(|v| (v - lo) * scale + target_min).collect())
}

/// `c1` on `[0, t1)`, `c2` on `[t1, length)`.
pub fn piecewise_column(c1: f64, c2: f64, t1: usize, length: usize) -> Vec<f64> {
    (0..length).map(|t| if t < t1 { c1 } else { c2 }).collect()
}

/// Add i.i.d. `N(0, noise_std^2)` draws element-wise.
pub fn add_awgn(seq: &[f64], noise_std: f64, rng: &mut Rng) -> Vec<f64> {
    if noise_std == 0.0 {
        return seq.to_vec();
    }
    seq.iter()
        .map(|v| v + noise_std * rng.sample::<f64, _>(StandardNormal))
        .collect()
}
