//! Fixed feature catalogs for feature-based clustering.
//!
//! Catalog A holds time-series statistics (8 features); catalog B holds
//! signal-style features (14 features). Both lists are versioned and part of
//! the report output, so changing them is a breaking change.

mod signal;
mod stats;

pub use signal::{abs_energy, cwt_mean_abs, fft_magnitudes, moments, padded_spectrum, ricker};
pub use stats::{acf, fit_holt, holt_sse, pacf, spectral_entropy, stability, HOLT_GRID_STEP};


use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::{Dataset, Standardizer};

pub const CATALOG_VERSION: &str = "catalogs v1";

pub const CATALOG_A: [&str; 8] = [
    "spectral_entropy",
    "acf_1",
    "acf_10",
    "pacf_1",
    "pacf_5",
    "stability",
    "holt_alpha",
    "holt_beta",
];

pub const CATALOG_B: [&str; 14] = [
    "abs_energy",
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "fft_1",
    "fft_2",
    "fft_3",
    "fft_4",
    "fft_5",
    "cwt_2",
    "cwt_5",
    "cwt_10",
    "cwt_20",
];

const STABILITY_TILES: usize = 10;
const CWT_WIDTHS: [f64; 4] = [2.0, 5.0, 10.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Catalog {
    A,
    B,
}

impl Catalog {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Catalog::A => &CATALOG_A,
            Catalog::B => &CATALOG_B,
        }
    }

    pub fn extract(self, seq: &[f64]) -> Result<FeatureVector> {
        match self {
            Catalog::A => method_a(seq),
            Catalog::B => method_b(seq),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub catalog: Catalog,
    pub values: IndexMap<String, f64>,
    pub warnings: Vec<String>,
}

impl FeatureVector {
    fn new(catalog: Catalog, values: Vec<f64>, warnings: Vec<String>) -> Self {
        let values = catalog
            .names()
            .iter()
            .map(|s| s.to_string())
            .zip(values)
            .collect();
        Self {
            catalog,
            values,
            warnings,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

/// Catalog A. A constant series gets zero for the autocorrelation and
/// entropy features, with a warning.
pub fn method_a(seq: &[f64]) -> Result<FeatureVector> {
    if seq.len() <= 10 {
        return Err(Error::TooShort {
            needed: 11,
            got: seq.len(),
        });
    }
    let mut warnings = Vec::new();
    let (entropy, r, p) = match (spectral_entropy(seq), acf(seq, 10), pacf(seq, 5)) {
        (Ok(h), Ok(r), Ok(p)) => (h, r, p),
        (Err(Error::ZeroVariance), ..) | (_, Err(Error::ZeroVariance), _) => {
            warnings.push("zero variance: acf/pacf/entropy set to 0".to_string());
            (0.0, vec![0.0; 10], vec![0.0; 5])
        }
        (Err(e), ..) | (_, Err(e), _) | (_, _, Err(e)) => return Err(e),
    };
    let (alpha, beta) = fit_holt(seq)?;
    let values = vec![
        entropy,
        r[0],
        r[9],
        p[0],
        p[4],
        stability(seq, STABILITY_TILES)?,
        alpha,
        beta,
    ];
    Ok(FeatureVector::new(Catalog::A, values, warnings))
}

/// Catalog B.
pub fn method_b(seq: &[f64]) -> Result<FeatureVector> {
    if seq.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: seq.len(),
        });
    }
    let (mean, var, skew, kurt) = moments(seq);
    let mut warnings = Vec::new();
    if var == 0.0 {
        warnings.push("zero variance: moments and spectra are 0".to_string());
    }
    let mut values = vec![abs_energy(seq), mean, var, skew, kurt];
    values.extend(fft_magnitudes(seq, 5));
    values.extend(CWT_WIDTHS.iter().map(|&a| cwt_mean_abs(seq, a)));
    Ok(FeatureVector::new(Catalog::B, values, warnings))
}

/// Per-record features concatenated across the selected measurement
/// columns, plus their standardized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub catalog: Catalog,
    pub record_ids: Vec<String>,
    /// Column names, `<measurement>.<feature>`.
    pub names: Vec<String>,
    pub raw: Vec<Vec<f64>>,
    pub standardized: Vec<Vec<f64>>,
    pub standardizer: Standardizer,
    pub warnings: Vec<String>,
    pub seconds: f64,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.raw.len()
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }
}

pub fn build_feature_matrix(
    dataset: &Dataset,
    catalog: Catalog,
    measurements: &[String],
    exec: Execution,
) -> Result<FeatureMatrix> {
    let start = Instant::now();
    if measurements.is_empty() {
        return Err(Error::Config("no measurement columns selected".into()));
    }
    for m in measurements {
        dataset.schema.column_index(m)?;
    }
    if dataset.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let per_record = exec::map_slice(exec, &dataset.records, |rec| {
        let mut row = Vec::with_capacity(catalog.names().len() * measurements.len());
        let mut warnings = Vec::new();
        for m in measurements {
            let fv = catalog.extract(&rec.values(m)?)?;
            row.extend(fv.values.values());
            warnings.extend(fv.warnings.into_iter().map(|w| format!("{} {m}: {w}", rec.id)));
        }
        Ok::<_, Error>((row, warnings))
    });
    let mut raw = Vec::with_capacity(dataset.len());
    let mut warnings = Vec::new();
    for r in per_record {
        let (row, w) = r?;
        raw.push(row);
        warnings.extend(w);
    }
    let standardizer = Standardizer::fit(&raw)?;
    let standardized = raw.iter().map(|r| standardizer.apply(r)).collect();
    let names = measurements
        .iter()
        .flat_map(|m| catalog.names().iter().map(move |f| format!("{m}.{f}")))
        .collect();
    Ok(FeatureMatrix {
        catalog,
        record_ids: dataset.records.iter().map(|r| r.id.clone()).collect(),
        names,
        raw,
        standardized,
        standardizer,
        warnings,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_dataset, simulate_arima, GenConfig};
    use crate::rng::stream;

    #[test]
    fn catalog_a_contract() {
        let x = simulate_arima(&[0.8], &[], 10_000, 1.0, &mut stream(1, &[])).unwrap();
        let fv = method_a(&x).unwrap();
        assert_eq!(fv.values.len(), 8);
        assert!(fv.values.values().all(|v| v.is_finite()));
        assert!((fv.get("acf_1").unwrap() - 0.8).abs() < 0.05);
        assert_eq!(fv, method_a(&x).unwrap());
    }

    #[test]
    fn constant_series_falls_back() {
        let fv = method_a(&[2.0; 50]).unwrap();
        assert_eq!(fv.get("acf_1"), Some(0.0));
        assert_eq!(fv.warnings.len(), 1);
        let fb = method_b(&[2.0; 50]).unwrap();
        assert_eq!(fb.get("variance"), Some(0.0));
        assert_eq!(fb.get("fft_1"), Some(0.0));
        assert_eq!(fb.values.len(), 14);
    }

    #[test]
    fn shift_invariance_asymmetry() {
        let x = simulate_arima(&[0.5], &[0.3], 300, 1.0, &mut stream(2, &[])).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v + 100.0).collect();
        let (a, b) = (method_a(&x).unwrap(), method_a(&y).unwrap());
        for f in ["acf_1", "acf_10", "pacf_1", "pacf_5", "spectral_entropy"] {
            assert!((a.get(f).unwrap() - b.get(f).unwrap()).abs() < 1e-9, "{f}");
        }
        let (a, b) = (method_b(&x).unwrap(), method_b(&y).unwrap());
        assert!((a.get("abs_energy").unwrap() - b.get("abs_energy").unwrap()).abs() > 1.0);
        assert!((a.get("mean").unwrap() - b.get("mean").unwrap() + 100.0).abs() < 1e-9);
    }

    #[test]
    fn matrix_shapes() {
        let cfg = GenConfig {
            n_records: 12,
            length: 120,
            ..GenConfig::full()
        };
        let (ds, _) = generate_dataset(&cfg).unwrap();
        let gas = vec!["gas".to_string()];
        let m = build_feature_matrix(&ds, Catalog::A, &gas, Execution::Parallel).unwrap();
        assert_eq!((m.rows(), m.cols()), (12, 8));
        assert_eq!(m.names[0], "gas.spectral_entropy");
        let all = ds.schema.columns.clone();
        let m = build_feature_matrix(&ds, Catalog::B, &all, Execution::Sequential).unwrap();
        assert_eq!((m.rows(), m.cols()), (12, 42));
        assert!(build_feature_matrix(&ds, Catalog::A, &["nope".into()], Execution::Sequential).is_err());
    }

    #[test]
    fn identical_records_identical_rows_in_any_order() {
        let cfg = GenConfig {
            n_records: 5,
            length: 100,
            ..GenConfig::full()
        };
        let (mut ds, _) = generate_dataset(&cfg).unwrap();
        ds.records[4].measurements = ds.records[1].measurements.clone();
        let cols = vec!["gas".to_string()];
        let m = build_feature_matrix(&ds, Catalog::B, &cols, Execution::Parallel).unwrap();
        assert_eq!(m.raw[1], m.raw[4]);
        let reversed = ds.subset(&[4, 3, 2, 1, 0]);
        let r = build_feature_matrix(&reversed, Catalog::B, &cols, Execution::Parallel).unwrap();
        assert_eq!(m.raw[0], r.raw[4]);
        assert_eq!(m.raw[2], r.raw[2]);
    }
}
