//! Time-series statistics: autocorrelation, partial autocorrelation,
//! spectral entropy, stability and Holt smoothing parameters.

use super::signal::padded_spectrum;
use crate::error::{Error, Result};

fn centered(seq: &[f64]) -> (Vec<f64>, f64) {
    let mean = seq.iter().sum::<f64>() / seq.len() as f64;
    let c: Vec<f64> = seq.iter().map(|v| v - mean).collect();
    let ss = c.iter().map(|v| v * v).sum::<f64>();
    (c, ss)
}

fn has_variance(ss: f64, seq: &[f64]) -> bool {
    let scale = seq.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    ss > 1e-24 * scale * scale * seq.len() as f64
}

/// Sample autocorrelations at lags `1..=max_lag`, each normalized by the
/// lag-0 sum of squares (the 1/n convention at every lag).
pub fn acf(seq: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 {
        return Err(Error::invalid("max_lag", "must be positive"));
    }
    if seq.len() <= max_lag {
        return Err(Error::TooShort {
            needed: max_lag + 1,
            got: seq.len(),
        });
    }
    let (c, ss) = centered(seq);
    if !has_variance(ss, seq) {
        return Err(Error::ZeroVariance);
    }
    Ok((1..=max_lag)
        .map(|k| c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / ss)
        .collect())
}

/// Partial autocorrelations at lags `1..=max_lag` by the Durbin-Levinson
/// recursion on [`acf`].
pub fn pacf(seq: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let r = acf(seq, max_lag)?;
    Ok(durbin_levinson(&r))
}

pub(crate) fn durbin_levinson(r: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r.len());
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 0..r.len() {
        let num = r[k] - phi.iter().enumerate().map(|(j, p)| p * r[k - 1 - j]).sum::<f64>();
        let kk = if v > 0.0 { num / v } else { 0.0 };
        let next: Vec<f64> = phi
            .iter()
            .enumerate()
            .map(|(j, p)| p - kk * phi[k - 1 - j])
            .chain(std::iter::once(kk))
            .collect();
        phi = next;
        v *= 1.0 - kk * kk;
        out.push(kk);
    }
    out
}

/// Shannon entropy of the normalized periodogram (bins `1..=N/2` of the
/// mean-removed, zero-padded transform) divided by `ln(N/2)`.
pub fn spectral_entropy(seq: &[f64]) -> Result<f64> {
    if seq.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: seq.len(),
        });
    }
    let (_, ss) = centered(seq);
    if !has_variance(ss, seq) {
        return Err(Error::ZeroVariance);
    }
    let spectrum = padded_spectrum(seq);
    let bins = spectrum.len() / 2;
    let power: Vec<f64> = spectrum[1..=bins].iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroVariance);
    }
    if bins < 2 {
        return Ok(0.0);
    }
    let h: f64 = power
        .iter()
        .map(|p| p / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    Ok((h / (bins as f64).ln()).clamp(0.0, 1.0))
}

/// Population variance of the means of `n_tiles` consecutive,
/// non-overlapping tiles whose lengths differ by at most one.
pub fn stability(seq: &[f64], n_tiles: usize) -> Result<f64> {
    if n_tiles == 0 {
        return Err(Error::invalid("n_tiles", "must be positive"));
    }
    if seq.len() < n_tiles {
        return Err(Error::TooShort {
            needed: n_tiles,
            got: seq.len(),
        });
    }
    let n = seq.len();
    let means: Vec<f64> = (0..n_tiles)
        .map(|t| {
            let tile = &seq[t * n / n_tiles..(t + 1) * n / n_tiles];
            tile.iter().sum::<f64>() / tile.len() as f64
        })
        .collect();
    let m = means.iter().sum::<f64>() / n_tiles as f64;
    Ok(means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n_tiles as f64)
}

/// Grid step for the Holt parameter search.
pub const HOLT_GRID_STEP: f64 = 0.05;

/// One-step-ahead squared error of Holt's linear method, starting from
/// level = first value and trend = second minus first.
pub fn holt_sse(seq: &[f64], alpha: f64, beta: f64) -> f64 {
    let mut level = seq[0];
    let mut trend = seq[1] - seq[0];
    let mut sse = 0.0;
    for &x in &seq[1..] {
        let forecast = level + trend;
        sse += (x - forecast) * (x - forecast);
        let new_level = alpha * x + (1.0 - alpha) * forecast;
        trend = beta * (new_level - level) + (1.0 - beta) * trend;
        level = new_level;
    }
    sse
}

/// Holt smoothing parameters minimizing one-step SSE over the grid
/// `{0, 0.05, ..., 1}^2`. Ties keep the earliest grid point (alpha-major).
pub fn fit_holt(seq: &[f64]) -> Result<(f64, f64)> {
    if seq.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: seq.len(),
        });
    }
    let steps = (1.0 / HOLT_GRID_STEP).round() as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for a in 0..=steps {
        let alpha = a as f64 * HOLT_GRID_STEP;
        for b in 0..=steps {
            let beta = b as f64 * HOLT_GRID_STEP;
            let sse = holt_sse(seq, alpha, beta);
            if sse < best.0 {
                best = (sse, alpha, beta);
            }
        }
    }
    Ok((best.1, best.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::simulate_arima;
    use crate::rng::stream;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn ar1(seed: u64) -> Vec<f64> {
        simulate_arima(&[0.8], &[], 10_000, 1.0, &mut stream(seed, &[])).unwrap()
    }

    #[test]
    fn acf_of_ar1() {
        let r = acf(&ar1(1), 2).unwrap();
        assert!((r[0] - 0.8).abs() < 0.05);
    }

    #[test]
    fn acf_of_alternating() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((acf(&x, 1).unwrap()[0] + 1.0).abs() < 0.01);
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(acf(&[2.0; 20], 3), Err(Error::ZeroVariance)));
        assert!(matches!(acf(&[1.0, 2.0], 2), Err(Error::TooShort { .. })));
    }

    #[test]
    fn pacf_of_ar1_cuts_off() {
        let p = pacf(&ar1(2), 3).unwrap();
        assert!((p[0] - 0.8).abs() < 0.05);
        assert!(p[1].abs() < 0.05);
    }

    #[test]
    fn pacf_white_noise_and_base_case() {
        let mut rng = stream(4, &[]);
        let x: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let p = pacf(&x, 10).unwrap();
        assert!(p.iter().all(|v| v.abs() < 0.05), "{p:?}");
        assert_eq!(p[0], acf(&x, 10).unwrap()[0]);
    }

    #[test]
    fn entropy_extremes() {
        let n = 256;
        let sine: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * 8.0 * t as f64 / n as f64).sin())
            .collect();
        assert!(spectral_entropy(&sine).unwrap() <= 0.2);
        let mut rng = stream(5, &[]);
        for _ in 0..5 {
            let x: Vec<f64> = (0..4096).map(|_| rng.sample(StandardNormal)).collect();
            let h = spectral_entropy(&x).unwrap();
            assert!((0.85..=1.0).contains(&h), "{h}");
        }
        assert!(matches!(spectral_entropy(&[1.0; 8]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn stability_examples() {
        assert_eq!(stability(&[3.0; 40], 10).unwrap(), 0.0);
        let step: Vec<f64> = (0..100).map(|i| if i < 50 { 0.0 } else { 10.0 }).collect();
        assert_eq!(stability(&step, 2).unwrap(), 25.0);
        let mut rng = stream(6, &[]);
        let x: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(stability(&x, 10).unwrap() < 0.05);
    }

    #[test]
    fn holt_on_lines() {
        let x: Vec<f64> = (0..50).map(|i| 5.0 + 1.5 * i as f64).collect();
        let (a, b) = fit_holt(&x).unwrap();
        assert!(holt_sse(&x, a, b) <= 1e-8);
        for v in [a, b] {
            let k = v / HOLT_GRID_STEP;
            assert!((k - k.round()).abs() < 1e-9);
        }
        assert!(matches!(fit_holt(&[1.0, 2.0]), Err(Error::TooShort { .. })));
    }

    #[test]
    fn holt_level_only_prefers_small_beta() {
        let mut small = 0;
        for seed in 0..50 {
            let mut rng = stream(seed, &[77]);
            let x: Vec<f64> = (0..1000)
                .map(|_| 10.0 + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let (_, b) = fit_holt(&x).unwrap();
            if b <= 0.2 {
                small += 1;
            }
        }
        assert!(small >= 45, "{small}/50");
    }
}
