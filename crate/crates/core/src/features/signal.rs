//! Signal-style features: energy, moments, FFT magnitudes and Ricker
//! wavelet responses.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Transform of the mean-removed series zero-padded to the next power of two.
pub fn padded_spectrum(seq: &[f64]) -> Vec<Complex64> {
    let n = seq.len().max(1).next_power_of_two();
    let mean = seq.iter().sum::<f64>() / seq.len().max(1) as f64;
    let mut buf: Vec<Complex64> = seq
        .iter()
        .map(|&v| Complex64::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Magnitudes of coefficients `1..=count` of [`padded_spectrum`]; bins past
/// the padded length are reported as zero.
pub fn fft_magnitudes(seq: &[f64], count: usize) -> Vec<f64> {
    let spec = padded_spectrum(seq);
    (1..=count)
        .map(|k| spec.get(k).map_or(0.0, |c| c.norm()))
        .collect()
}

pub fn abs_energy(seq: &[f64]) -> f64 {
    seq.iter().map(|v| v * v).sum()
}

/// Mean, population variance, skewness and excess kurtosis. Higher moments
/// are zero for constant input.
pub fn moments(seq: &[f64]) -> (f64, f64, f64, f64) {
    let n = seq.len() as f64;
    let mean = seq.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in seq {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let scale = mean.abs().max(1e-300);
    if m2 <= 1e-24 * scale * scale {
        return (mean, 0.0, 0.0, 0.0);
    }
    (mean, m2, m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Ricker (Mexican hat) wavelet of width `a` evaluated at `t`.
pub fn ricker(t: f64, a: f64) -> f64 {
    let norm = 2.0 / ((3.0 * a).sqrt() * std::f64::consts::PI.powf(0.25));
    let q = (t / a) * (t / a);
    norm * (1.0 - q) * (-q / 2.0).exp()
}

/// Mean absolute response of the mean-removed series to a Ricker wavelet of
/// width `a`, with the kernel truncated at `|t| <= 5a` and zero extension.
pub fn cwt_mean_abs(seq: &[f64], a: f64) -> f64 {
    let n = seq.len();
    let mean = seq.iter().sum::<f64>() / n as f64;
    let half = (5.0 * a).ceil() as isize;
    let kernel: Vec<f64> = (-half..=half).map(|t| ricker(t as f64, a)).collect();
    let total: f64 = (0..n as isize)
        .map(|t| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(k, w)| {
                    let idx = t + k as isize - half;
                    (0..n as isize).contains(&idx).then(|| w * (seq[idx as usize] - mean))
                })
                .sum::<f64>()
                .abs()
        })
        .sum();
    total / n as f64
}
