use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::frame::Frame;
use super::network::{Architecture, Dims, Example, Network, Reduction, INTERPRETATION};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::series::{Standardizer, SupervisedSet};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub architecture: Architecture,
    pub hidden: usize,
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Multiplicative learning-rate decay applied after every epoch.
    #[serde(default = "no_decay")]
    pub lr_decay: f64,
}

fn no_decay() -> f64 {
    1.0
}

impl ModelSpec {
    /// Defaults: H = 32, w = 24, Adam lr 1e-3, 200 epochs, batch 32.
    pub fn new(architecture: Architecture) -> Self {
        Self {
            architecture,
            hidden: 32,
            window: 24,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            seed: 0,
            lr_decay: 1.0,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * grad[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// A fitted forecaster with its scalers, serializable as versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub interpretation: String,
    pub spec: ModelSpec,
    pub network: Network,
    /// Per-channel scaler for window values.
    pub input_scaler: Standardizer,
    pub static_scaler: Option<Standardizer>,
    pub target_scaler: Standardizer,
    /// Mean squared error per epoch, in standardized units.
    pub history: Vec<f64>,
    pub frame: Option<Frame>,
}

impl TrainedModel {
    /// Forecast in original units from a raw window (time-major) and raw
    /// static vector.
    pub fn predict_window(&self, window: &[f64], statics: Option<&[f64]>) -> Result<f64> {
        let w = self.input_scaler.apply_cyclic(window);
        let s = match (&self.static_scaler, statics) {
            (Some(sc), Some(s)) if s.len() == sc.width() => Some(sc.apply(s)),
            (Some(sc), Some(s)) => {
                return Err(Error::ShapeMismatch(format!("{} static values, expected {}", s.len(), sc.width())));
            }
            (Some(_), None) => return Err(Error::StaticBranchMismatch("model needs static input".into())),
            (None, _) => None,
        };
        let y = self.network.forward(Example {
            window: &w,
            statics: s.as_deref(),
        })?;
        Ok(self.target_scaler.invert_scalar(0, y))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported model format {}", m.format_version)));
        }
        let expected = Network::zeros(m.network.architecture, m.network.dims)?.n_params();
        if m.network.params.len() != expected {
            return Err(Error::Schema(format!(
                "model has {} parameters, architecture needs {expected}",
                m.network.params.len()
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Mini-batch Adam on squared error. Windows, static features and targets
/// are standardized with scalers fitted on `set`. Deterministic given
/// `spec.seed`.
pub fn train(spec: &ModelSpec, set: &SupervisedSet) -> Result<TrainedModel> {
    if set.is_empty() {
        return Err(Error::EmptyInput);
    }
    if set.window != spec.window {
        return Err(Error::ShapeMismatch(format!(
            "set window {} but model window {}",
            set.window, spec.window
        )));
    }
    let arch = spec.architecture;
    let statics = match (arch.uses_static(), &set.statics) {
        (true, Some(s)) => Some(s),
        (false, None) => None,
        (true, None) => return Err(Error::StaticBranchMismatch(format!("{arch} needs static features"))),
        (false, Some(_)) => return Err(Error::StaticBranchMismatch(format!("{arch} takes no static features"))),
    };
    if spec.batch_size == 0 || !(spec.learning_rate > 0.0) || !(spec.lr_decay > 0.0 && spec.lr_decay <= 1.0) {
        return Err(Error::invalid("spec", "need batch size > 0, learning rate > 0, decay in (0, 1]"));
    }
    let steps: Vec<&[f64]> = set.inputs.iter().flat_map(|r| r.chunks(set.dim)).collect();
    let input_scaler = Standardizer::fit(&steps)?;
    let static_scaler = statics.map(|s| Standardizer::fit(s)).transpose()?;
    let target_scaler = Standardizer::fit_values(&set.targets)?;
    let xs: Vec<Vec<f64>> = set.inputs.iter().map(|r| input_scaler.apply_cyclic(r)).collect();
    let ss: Option<Vec<Vec<f64>>> = statics.map(|s| s.iter().map(|r| static_scaler.as_ref().unwrap().apply(r)).collect());
    let ys: Vec<f64> = set.targets.iter().map(|&y| target_scaler.apply_scalar(0, y)).collect();
    let dims = Dims {
        window: spec.window,
        input: set.dim,
        static_dim: ss.as_ref().map_or(0, |s| s[0].len()),
        hidden: spec.hidden,
    };
    let mut net = Network::init(arch, dims, spec.seed)?;
    let mut adam = Adam::new(net.n_params());
    let mut order: Vec<usize> = (0..ys.len()).collect();
    let mut rng = stream(spec.seed, &[0x5eed]);
    let mut history = Vec::with_capacity(spec.epochs);
    let mut lr = spec.learning_rate;
    for epoch in 0..spec.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(spec.batch_size) {
            let batch: Vec<Example> = chunk
                .iter()
                .map(|&i| Example {
                    window: &xs[i],
                    statics: ss.as_ref().map(|s| s[i].as_slice()),
                })
                .collect();
            let targets: Vec<f64> = chunk.iter().map(|&i| ys[i]).collect();
            let (loss, grad) = net.loss_and_grad(&batch, &targets, Reduction::Mean)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            total += loss * chunk.len() as f64;
            adam.step(&mut net.params, &grad, lr);
        }
        let loss = total / ys.len() as f64;
        if !loss.is_finite() || net.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch, loss });
        }
        log::trace!("{arch} epoch {epoch}: loss {loss:.6}");
        history.push(loss);
        lr *= spec.lr_decay;
    }
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        interpretation: INTERPRETATION.to_string(),
        spec: spec.clone(),
        network: net,
        input_scaler,
        static_scaler,
        target_scaler,
        history,
        frame: None,
    })
}
