use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column z-scoring fitted on training rows only.
///
/// Uses the population (1/n) standard deviation. Zero-variance columns keep a
/// divisor of 1 so they map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Fit on rows of equal width.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?.as_ref();
        let cols = first.len();
        if cols == 0 {
            return Err(Error::EmptyInput);
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; cols];
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: cols,
                });
            }
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; cols];
        for row in rows {
            for ((s, v), m) in vars.iter_mut().zip(row.as_ref()).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { means, stds })
    }

    /// Fit a single-column standardizer on a flat slice.
    pub fn fit_values(values: &[f64]) -> Result<Self> {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        Self::fit(&rows)
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    /// Standardize column `col` of a scalar.
    pub fn apply_scalar(&self, col: usize, v: f64) -> f64 {
        (v - self.means[col]) / self.stds[col]
    }

    pub fn invert_scalar(&self, col: usize, v: f64) -> f64 {
        v * self.stds[col] + self.means[col]
    }

    /// Apply to a row whose width is a multiple of the fitted width, cycling
    /// through columns (used for time-major flattened windows).
    pub fn apply_cyclic(&self, row: &[f64]) -> Vec<f64> {
        let w = self.width();
        row.iter()
            .enumerate()
            .map(|(i, &v)| self.apply_scalar(i % w, v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standardizes_simple_column() {
        let s = Standardizer::fit_values(&[2.0, 4.0, 6.0]).unwrap();
        let out: Vec<f64> = [2.0, 4.0, 6.0].iter().map(|&v| s.apply_scalar(0, v)).collect();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let s = Standardizer::fit_values(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(s.stds[0], 1.0);
        assert_eq!(s.apply(&[5.0]), vec![0.0]);
    }

    #[test]
    fn empty_rejected() {
        let rows: Vec<Vec<f64>> = vec![];
        assert!(matches!(Standardizer::fit(&rows), Err(Error::EmptyInput)));
    }

    proptest! {
        #[test]
        fn round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..30)) {
            let s = Standardizer::fit(&rows).unwrap();
            for row in &rows {
                let back = s.invert(&s.apply(row));
                for (a, b) in back.iter().zip(row) {
                    prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
                }
            }
        }

        #[test]
        fn training_columns_are_unit_scaled(rows in prop::collection::vec(prop::collection::vec(-100f64..100.0, 2), 2..40)) {
            let s = Standardizer::fit(&rows).unwrap();
            let z: Vec<Vec<f64>> = rows.iter().map(|r| s.apply(r)).collect();
            let n = z.len() as f64;
            for c in 0..2 {
                let mean = z.iter().map(|r| r[c]).sum::<f64>() / n;
                let var = z.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                if s.stds[c] != 1.0 || var > 0.0 {
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-9 || var == 0.0);
                }
            }
        }
    }
}
