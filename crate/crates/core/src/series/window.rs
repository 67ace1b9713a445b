use serde::{Deserialize, Serialize};

use super::{Column, SeriesRecord};
use crate::error::{Error, Result};

/// Supervised examples cut from one or more series.
///
/// Each row of `inputs` is a window of `window` time steps flattened time-major
/// (`dim` values per step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Static features attached to each row, when the model uses them.
    pub statics: Option<Vec<Vec<f64>>>,
    pub window: usize,
    pub horizon: usize,
    pub dim: usize,
}

impl SupervisedSet {
    pub fn empty(window: usize, horizon: usize, dim: usize, with_static: bool) -> Self {
        Self {
            inputs: Vec::new(),
            targets: Vec::new(),
            statics: with_static.then(Vec::new),
            window,
            horizon,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Append another set with identical framing. Windows never span series
    /// because each set was cut from a single series.
    pub fn extend(&mut self, other: SupervisedSet) -> Result<()> {
        if other.window != self.window || other.horizon != self.horizon || other.dim != self.dim {
            return Err(Error::ShapeMismatch("supervised sets differ in framing".into()));
        }
        match (&mut self.statics, other.statics) {
            (Some(mine), Some(theirs)) => mine.extend(theirs),
            (None, None) => {}
            _ => return Err(Error::StaticBranchMismatch("mixing static and non-static rows".into())),
        }
        self.inputs.extend(other.inputs);
        self.targets.extend(other.targets);
        Ok(())
    }
}

/// Cut one series into (window → value `horizon` steps after the window) pairs.
pub fn make_supervised(series: &[f64], window: usize, horizon: usize) -> Result<SupervisedSet> {
    make_supervised_multi(&[series], series, window, horizon)
}

/// Multivariate variant: `inputs` are the input columns (all the same length
/// as `target`), flattened time-major into each row.
pub fn make_supervised_multi(
    inputs: &[&[f64]],
    target: &[f64],
    window: usize,
    horizon: usize,
) -> Result<SupervisedSet> {
    if window == 0 {
        return Err(Error::invalid("window", "must be positive"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be positive"));
    }
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let len = target.len();
    for col in inputs {
        if col.len() != len {
            return Err(Error::LengthMismatch {
                left: col.len(),
                right: len,
            });
        }
    }
    if len < window + horizon {
        return Err(Error::TooShort {
            needed: window + horizon,
            got: len,
        });
    }
    let dim = inputs.len();
    let count = len - window - horizon + 1;
    let mut set = SupervisedSet::empty(window, horizon, dim, false);
    set.inputs.reserve(count);
    for start in 0..count {
        let mut row = Vec::with_capacity(window * dim);
        for t in start..start + window {
            row.extend(inputs.iter().map(|col| col[t]));
        }
        set.inputs.push(row);
        set.targets.push(target[start + window + horizon - 1]);
    }
    Ok(set)
}

/// Split every column of a record at `n`: the training prefix and the rest.
pub fn split_prefix(record: &SeriesRecord, n: usize) -> Result<(Vec<Column>, Vec<Column>)> {
    let len = record.len()?;
    if n == 0 || n >= len {
        return Err(Error::OutOfRange { index: n, len });
    }
    Ok(record
        .measurements
        .values()
        .map(|col| (col[..n].to_vec(), col[n..].to_vec()))
        .unzip())
}
