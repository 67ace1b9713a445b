use serde::{Deserialize, Serialize};

use super::train::{train, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::series::{make_supervised_multi, require_observed, SeriesRecord, SupervisedSet};

/// Direct forecasting setup: from the first `n_train` values of each
/// record, predict the target at (1-based) index `k`.
///
/// Training records contribute every window of their first `k` values whose
/// target lies `k - n_train` steps past the window end, so the last training
/// example is exactly the query window of that record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame {
    pub n_train: usize,
    pub k: usize,
    pub window: usize,
    /// Measurement columns fed to the model at each timestep.
    pub inputs: Vec<String>,
    pub target: String,
}

impl Frame {
    pub fn horizon(&self) -> usize {
        self.k - self.n_train
    }

    pub fn validate(&self, length: usize) -> Result<()> {
        if self.window == 0 || self.n_train < self.window {
            return Err(Error::invalid("window", format!("need 1 <= window <= n_train ({})", self.n_train)));
        }
        if self.k <= self.n_train {
            return Err(Error::invalid("k", format!("horizon index {} must exceed n_train {}", self.k, self.n_train)));
        }
        if self.k > length {
            return Err(Error::OutOfRange {
                index: self.k,
                len: length,
            });
        }
        if self.inputs.is_empty() {
            return Err(Error::invalid("inputs", "no input columns"));
        }
        Ok(())
    }

    fn columns(&self, record: &SeriesRecord, upto: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let inputs = self
            .inputs
            .iter()
            .map(|c| require_observed(&record.column(c)?[..upto]))
            .collect::<Result<_>>()?;
        let target = require_observed(&record.column(&self.target)?[..upto])?;
        Ok((inputs, target))
    }

    /// Training examples contributed by one record.
    pub fn examples(&self, record: &SeriesRecord, with_static: bool) -> Result<SupervisedSet> {
        self.validate(record.len()?)?;
        let (inputs, target) = self.columns(record, self.k)?;
        let refs: Vec<&[f64]> = inputs.iter().map(|c| c.as_slice()).collect();
        let mut set = make_supervised_multi(&refs, &target, self.window, self.horizon())?;
        if with_static {
            set.statics = Some(vec![record.static_features.clone(); set.len()]);
        }
        Ok(set)
    }

    pub fn training_set(&self, records: &[&SeriesRecord], with_static: bool) -> Result<SupervisedSet> {
        let mut set = SupervisedSet::empty(self.window, self.horizon(), self.inputs.len(), with_static);
        for r in records {
            set.extend(self.examples(r, with_static)?)?;
        }
        if set.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(set)
    }

    /// The last `window` training-prefix steps (time-major) and the true
    /// target value at index `k`.
    pub fn query(&self, record: &SeriesRecord) -> Result<(Vec<f64>, f64)> {
        self.validate(record.len()?)?;
        let (inputs, target) = self.columns(record, self.k)?;
        let mut window = Vec::with_capacity(self.window * inputs.len());
        for t in self.n_train - self.window..self.n_train {
            window.extend(inputs.iter().map(|c| c[t]));
        }
        Ok((window, target[self.k - 1]))
    }
}

/// Trains one direct model for `frame` on the given records.
pub fn fit_frame(spec: &ModelSpec, frame: &Frame, records: &[&SeriesRecord]) -> Result<TrainedModel> {
    if spec.window != frame.window {
        return Err(Error::invalid("window", "model and frame windows differ"));
    }
    let set = frame.training_set(records, spec.architecture.uses_static())?;
    let mut model = train(spec, &set)?;
    model.frame = Some(frame.clone());
    Ok(model)
}

/// Forecast of the target at index `k` of `record` from its first
/// `n_train` values, in original units.
pub fn predict_horizon(model: &TrainedModel, record: &SeriesRecord, n_train: usize, k: usize) -> Result<f64> {
    let frame = model
        .frame
        .as_ref()
        .ok_or_else(|| Error::invalid("model", "not trained for a forecasting frame"))?;
    if k <= n_train || frame.n_train != n_train || frame.k != k {
        return Err(Error::HorizonMismatch {
            trained_n: frame.n_train,
            trained_k: frame.k,
            n_train,
            k,
        });
    }
    let (window, _) = frame.query(record)?;
    let statics = model.spec.architecture.uses_static().then_some(record.static_features.as_slice());
    model.predict_window(&window, statics)
}
