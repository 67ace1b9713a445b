use serde::{Deserialize, Serialize};

use super::impute::{impute, ImputeMethod};
use super::loess::{decompose, DEFAULT_SPAN};
use crate::error::Result;

/// Multiplier on the interquartile range of the remainder.
pub const IQR_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub span: f64,
    pub period: Option<usize>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            span: DEFAULT_SPAN,
            period: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Quartile fences `Q1 - 3 IQR`, `Q3 + 3 IQR`.
    Iqr,
    /// IQR collapsed to zero: `|r - median| > 3 std`.
    StdFallback,
    /// Remainder is constant; nothing can be an outlier.
    Constant,
}

/// Outcome of remainder thresholding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    /// Strictly increasing positions of flagged values.
    pub flagged: Vec<usize>,
    /// Value written at each flagged position by [`clean_series`]; empty
    /// when only detection ran.
    pub replacements: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub rule: ThresholdRule,
    pub span: f64,
}

/// Linear-interpolated quantile (type 7) of already sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Flag values whose decomposition remainder falls outside the quartile
/// fences.
pub fn detect_outliers(seq: &[f64], cfg: &DetectorConfig) -> Result<AnomalyReport> {
    let remainder = decompose(seq, cfg.period, cfg.span)?.remainder;
    let mut sorted = remainder.clone();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let spread = sorted[sorted.len() - 1] - sorted[0];
    let scale = sorted.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);

    let (lower, upper, rule) = if spread <= 1e-12 * scale {
        (f64::NEG_INFINITY, f64::INFINITY, ThresholdRule::Constant)
    } else if iqr > 1e-12 * scale {
        (q1 - IQR_FACTOR * iqr, q3 + IQR_FACTOR * iqr, ThresholdRule::Iqr)
    } else {
        let n = remainder.len() as f64;
        let mean = remainder.iter().sum::<f64>() / n;
        let sd = (remainder.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
        let med = quantile(&sorted, 0.5);
        (med - IQR_FACTOR * sd, med + IQR_FACTOR * sd, ThresholdRule::StdFallback)
    };
    let flagged = remainder
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < lower || r > upper)
        .map(|(i, _)| i)
        .collect();
    Ok(AnomalyReport {
        flagged,
        replacements: Vec::new(),
        lower,
        upper,
        rule,
        span: cfg.span,
    })
}

/// Detect outliers and replace them by linear interpolation between the
/// nearest unflagged neighbours (nearest clean value at the boundaries).
pub fn clean_series(seq: &[f64], cfg: &DetectorConfig) -> Result<(Vec<f64>, AnomalyReport)> {
    let report = detect_outliers(seq, cfg)?;
    clean_flagged(seq, report)
}

/// Replace the positions flagged in `report`.
pub fn clean_flagged(seq: &[f64], mut report: AnomalyReport) -> Result<(Vec<f64>, AnomalyReport)> {
    let mut marked: Vec<Option<f64>> = seq.iter().copied().map(Some).collect();
    for &i in &report.flagged {
        marked[i] = None;
    }
    let cleaned = impute(&marked, ImputeMethod::LinearInterpolation)?;
    report.replacements = report.flagged.iter().map(|&i| cleaned[i]).collect();
    Ok((cleaned, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_record, GenConfig};

    fn smooth(n: usize) -> Vec<f64> {
        (0..n).map(|i| 100.0 + 20.0 * (i as f64 / 15.0).sin()).collect()
    }

    #[test]
    fn constant_has_no_flags() {
        let r = detect_outliers(&[3.0; 50], &DetectorConfig::default()).unwrap();
        assert!(r.flagged.is_empty());
        assert_eq!(r.rule, ThresholdRule::Constant);
    }

    #[test]
    fn single_spike_flagged() {
        let mut x = smooth(200);
        let max = x.iter().copied().fold(f64::MIN, f64::max);
        x[77] = 10.0 * max;
        let r = detect_outliers(&x, &DetectorConfig::default()).unwrap();
        assert!(r.flagged.contains(&77), "{:?}", r.flagged);
    }

    #[test]
    fn degenerate_iqr_uses_std_rule() {
        // A linear series is reproduced exactly, so the remainder is zero
        // except where the bump pulls the local fits.
        let mut x: Vec<f64> = (0..200).map(|i| i as f64).collect();
        x[100] += 1e4;
        let r = detect_outliers(&x, &DetectorConfig { span: 0.02, period: None }).unwrap();
        assert!(r.flagged.contains(&100));
        assert!(r.flagged.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interpolates_flagged() {
        let report = AnomalyReport {
            flagged: vec![2],
            replacements: vec![],
            lower: 0.0,
            upper: 0.0,
            rule: ThresholdRule::Iqr,
            span: 0.25,
        };
        let (clean, report) = clean_flagged(&[1.0, 2.0, 100.0, 4.0, 5.0], report).unwrap();
        assert_eq!(clean, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(report.replacements, vec![3.0]);
    }

    #[test]
    fn boundary_spike_takes_first_clean_value() {
        let mut x = smooth(100);
        x[0] = 1e6;
        let (clean, report) = clean_series(&x, &DetectorConfig::default()).unwrap();
        assert!(report.flagged.contains(&0));
        let first_clean = (0..100).find(|i| !report.flagged.contains(i)).unwrap();
        assert_eq!(clean[0], x[first_clean]);
    }

    #[test]
    fn no_outliers_is_identity() {
        let x = smooth(150);
        let (clean, report) = clean_series(&x, &DetectorConfig::default()).unwrap();
        assert!(report.flagged.is_empty());
        assert_eq!(clean, x);
    }

    #[test]
    fn unflagged_values_untouched() {
        let cfg = GenConfig::full();
        let (cols, _) = generate_record(&cfg, 3).unwrap();
        for x in cols.values() {
            let (clean, report) = clean_series(x, &DetectorConfig::default()).unwrap();
            for i in 0..x.len() {
                if !report.flagged.contains(&i) {
                    assert_eq!(clean[i], x[i]);
                }
            }
        }
    }

    #[test]
    fn finds_injected_outliers() {
        let cfg = GenConfig::full();
        let (cols, log) = generate_record(&cfg, 0).unwrap();
        let x = &cols["gas"];
        let r = detect_outliers(x, &DetectorConfig::default()).unwrap();
        let truth: Vec<usize> = log["gas"].iter().map(|e| e.index).collect();
        let hits = truth.iter().filter(|i| r.flagged.contains(i)).count();
        let false_pos = r.flagged.iter().filter(|i| !truth.contains(i)).count();
        assert!(hits >= 9, "hits {hits}");
        assert!(false_pos as f64 <= 0.02 * x.len() as f64, "false positives {false_pos}");
    }
}
