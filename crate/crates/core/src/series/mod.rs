//! Domain types shared by the whole pipeline: records, datasets, supervised
//! windows and column standardization.

mod standardize;
mod window;

pub use standardize::Standardizer;
pub use window::{make_supervised, make_supervised_multi, split_prefix, SupervisedSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the forecasting target column.
pub const TARGET_COLUMN: &str = "gas";

/// One measurement column. `None` marks a missing observation.
pub type Column = Vec<Option<f64>>;

/// Convert a fully observed slice into a column.
pub fn observed(values: &[f64]) -> Column {
    values.iter().copied().map(Some).collect()
}

/// Extract plain values, failing on the first missing entry.
pub fn require_observed(column: &[Option<f64>]) -> Result<Vec<f64>> {
    column
        .iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(Error::MissingValue(i)))
        .collect()
}

/// One multivariate series plus its static feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub id: String,
    pub measurements: IndexMap<String, Column>,
    pub static_features: Vec<f64>,
}

impl SeriesRecord {
    pub fn new(
        id: impl Into<String>,
        measurements: IndexMap<String, Column>,
        static_features: Vec<f64>,
    ) -> Result<Self> {
        let record = Self {
            id: id.into(),
            measurements,
            static_features,
        };
        record.len()?;
        Ok(record)
    }

    /// Common length of all measurement columns.
    pub fn len(&self) -> Result<usize> {
        let mut lengths = self.measurements.iter();
        let (_, first) = lengths
            .next()
            .ok_or_else(|| Error::Schema(format!("record {} has no measurements", self.id)))?;
        let len = first.len();
        if len == 0 {
            return Err(Error::Schema(format!("record {} has empty columns", self.id)));
        }
        for (name, col) in lengths {
            if col.len() != len {
                return Err(Error::Schema(format!(
                    "record {}: column `{name}` has length {} but expected {len}",
                    self.id,
                    col.len()
                )));
            }
        }
        Ok(len)
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.measurements
            .get(name)
            .ok_or_else(|| Error::Schema(format!("record {} has no column `{name}`", self.id)))
    }

    /// Fully observed values of one column.
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        require_observed(self.column(name)?)
    }
}

/// Shape shared by every record of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<String>,
    pub length: usize,
    pub static_dim: usize,
}

impl Schema {
    pub fn check(&self, record: &SeriesRecord) -> Result<()> {
        let names: Vec<&String> = record.measurements.keys().collect();
        if names.len() != self.columns.len() || names.iter().zip(&self.columns).any(|(a, b)| *a != b) {
            return Err(Error::Schema(format!(
                "record {} has columns {:?}, schema expects {:?}",
                record.id, names, self.columns
            )));
        }
        let len = record.len()?;
        if len != self.length {
            return Err(Error::Schema(format!(
                "record {} has length {len}, schema expects {}",
                record.id, self.length
            )));
        }
        if record.static_features.len() != self.static_dim {
            return Err(Error::Schema(format!(
                "record {} has {} static features, schema expects {}",
                record.id,
                record.static_features.len(),
                self.static_dim
            )));
        }
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Schema(format!("unknown column `{name}`")))
    }
}

/// A collection of records sharing one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<SeriesRecord>,
    pub schema: Schema,
    pub seed: u64,
}

impl Dataset {
    /// Build a dataset, validating ids and the schema of every record.
    pub fn new(records: Vec<SeriesRecord>, schema: Schema, seed: u64) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for record in &records {
            if !seen.insert(record.id.as_str()) {
                return Err(Error::Schema(format!("duplicate record id `{}`", record.id)));
            }
            schema.check(record)?;
        }
        Ok(Self {
            records,
            schema,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The sub-dataset made of the given record positions, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            schema: self.schema.clone(),
            seed: self.seed,
        }
    }
}
