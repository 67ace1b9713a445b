//! The seven forecasting architectures (architecture interpretation v1).
//!
//! M1 LSTM -> linear head. M2 two stacked LSTMs. M3 bidirectional LSTM
//! (forward and reversed final states concatenated). M4 LSTM branch and a
//! tanh dense branch on the static vector, fused by two dense layers. M5
//! static vector appended to every timestep of one LSTM. M6 LSTM final state
//! concatenated with the raw static vector into the head. M7 dense-only on
//! the flattened window and static vector.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::layers::{Activation, Dense, Lstm, LstmTrace};
use crate::error::{Error, Result};
use crate::rng::stream;

pub const INTERPRETATION: &str = "architecture interpretation v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
}

impl Architecture {
    pub const ALL: [Architecture; 7] = [
        Architecture::M1,
        Architecture::M2,
        Architecture::M3,
        Architecture::M4,
        Architecture::M5,
        Architecture::M6,
        Architecture::M7,
    ];

    pub fn uses_static(self) -> bool {
        !matches!(self, Architecture::M1 | Architecture::M2 | Architecture::M3)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["M1", "M2", "M3", "M4", "M5", "M6", "M7"][self.index()]
    }

    pub fn describe(self) -> &'static str {
        match self {
            Architecture::M1 => "LSTM(H) -> dense(1)",
            Architecture::M2 => "LSTM(H) -> LSTM(H) -> dense(1)",
            Architecture::M3 => "BiLSTM(2H) -> dense(1)",
            Architecture::M4 => "[LSTM(H) | tanh dense(static->H)] -> tanh dense(H) -> dense(1)",
            Architecture::M5 => "LSTM(H) over [x_t | static] -> dense(1)",
            Architecture::M6 => "[LSTM(H) | static] -> dense(1)",
            Architecture::M7 => "tanh dense([window | static] -> H) -> dense(1)",
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}; expected M1..M7")))
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Input geometry: `window` timesteps of `input` channels, `static_dim`
/// static features, `hidden` units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub window: usize,
    pub input: usize,
    pub static_dim: usize,
    pub hidden: usize,
}

#[derive(Debug, Clone)]
struct Layout {
    lstm: Vec<Lstm>,
    dense: Vec<Dense>,
    total: usize,
}

fn layout(arch: Architecture, d: Dims) -> Layout {
    use Activation::{Linear, Tanh};
    let (h, s) = (d.hidden, d.static_dim);
    let mut off = 0;
    let lstm = |input: usize, off: &mut usize| {
        let l = Lstm {
            input,
            hidden: h,
            offset: *off,
        };
        *off += l.n_params();
        l
    };
    let mut ls = Vec::new();
    match arch {
        Architecture::M1 | Architecture::M4 | Architecture::M6 => ls.push(lstm(d.input, &mut off)),
        Architecture::M2 => {
            ls.push(lstm(d.input, &mut off));
            ls.push(lstm(h, &mut off));
        }
        Architecture::M3 => {
            ls.push(lstm(d.input, &mut off));
            ls.push(lstm(d.input, &mut off));
        }
        Architecture::M5 => ls.push(lstm(d.input + s, &mut off)),
        Architecture::M7 => {}
    }
    let shapes: Vec<(usize, usize, Activation)> = match arch {
        Architecture::M1 | Architecture::M2 | Architecture::M5 => vec![(h, 1, Linear)],
        Architecture::M3 => vec![(2 * h, 1, Linear)],
        Architecture::M4 => vec![(s, h, Tanh), (2 * h, h, Tanh), (h, 1, Linear)],
        Architecture::M6 => vec![(h + s, 1, Linear)],
        Architecture::M7 => vec![(d.window * d.input + s, h, Tanh), (h, 1, Linear)],
    };
    let dense = shapes
        .into_iter()
        .map(|(input, output, activation)| {
            let l = Dense {
                input,
                output,
                activation,
                offset: off,
            };
            off += l.n_params();
            l
        })
        .collect();
    Layout {
        lstm: ls,
        dense,
        total: off,
    }
}

/// One example: a time-major flattened window (`window * input` values)
/// and, for M4-M7, the static vector.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub window: &'a [f64],
    pub statics: Option<&'a [f64]>,
}

pub struct Trace {
    lstm: Vec<LstmTrace>,
    /// Input and output of every dense layer.
    dense_io: Vec<(Vec<f64>, Vec<f64>)>,
    /// Per-step LSTM inputs when they differ from the raw window (M5).
    augmented: Vec<Vec<f64>>,
    pub output: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    #[default]
    Mean,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub architecture: Architecture,
    pub dims: Dims,
    pub params: Vec<f64>,
}

impl Network {
    /// Zero-initialized network. M4-M7 need `static_dim > 0`; M1-M3 need 0.
    pub fn zeros(architecture: Architecture, dims: Dims) -> Result<Self> {
        if dims.window == 0 || dims.input == 0 || dims.hidden == 0 {
            return Err(Error::invalid("dims", "window, input and hidden must be positive"));
        }
        match (architecture.uses_static(), dims.static_dim) {
            (true, 0) => {
                return Err(Error::StaticBranchMismatch(format!("{architecture} needs static features")));
            }
            (false, s) if s > 0 => {
                return Err(Error::StaticBranchMismatch(format!("{architecture} takes no static features")));
            }
            _ => {}
        }
        let total = layout(architecture, dims).total;
        Ok(Self {
            architecture,
            dims,
            params: vec![0.0; total],
        })
    }

    /// Uniform in `±1/sqrt(fan_in)` per layer.
    pub fn init(architecture: Architecture, dims: Dims, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(architecture, dims)?;
        let lay = layout(architecture, dims);
        let mut rng = stream(seed, &[0x1417]);
        let ranges = lay
            .lstm
            .iter()
            .map(|l| (l.offset, l.n_params(), l.fan_in()))
            .chain(lay.dense.iter().map(|l| (l.offset, l.n_params(), l.fan_in())));
        for (off, n, fan_in) in ranges {
            let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
            for p in &mut net.params[off..off + n] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn check(&self, ex: &Example) -> Result<()> {
        let d = self.dims;
        if ex.window.len() != d.window * d.input {
            return Err(Error::ShapeMismatch(format!(
                "window has {} values, expected {}x{}",
                ex.window.len(),
                d.window,
                d.input
            )));
        }
        match (self.architecture.uses_static(), ex.statics) {
            (true, Some(s)) if s.len() == d.static_dim => Ok(()),
            (true, Some(s)) => Err(Error::ShapeMismatch(format!("{} static values, expected {}", s.len(), d.static_dim))),
            (true, None) => Err(Error::StaticBranchMismatch(format!("{} needs static input", self.architecture))),
            (false, Some(_)) => Err(Error::StaticBranchMismatch(format!("{} takes no static input", self.architecture))),
            (false, None) => Ok(()),
        }
    }

    fn steps<'a>(&self, window: &'a [f64]) -> Vec<&'a [f64]> {
        window.chunks(self.dims.input).collect()
    }

    pub fn forward(&self, ex: Example) -> Result<f64> {
        Ok(self.forward_trace(ex)?.output)
    }

    pub fn forward_trace(&self, ex: Example) -> Result<Trace> {
        self.check(&ex)?;
        let lay = layout(self.architecture, self.dims);
        let p = &self.params;
        let xs = self.steps(ex.window);
        let mut tr = Trace {
            lstm: Vec::new(),
            dense_io: Vec::new(),
            augmented: Vec::new(),
            output: 0.0,
        };
        let dense = |tr: &mut Trace, i: usize, x: Vec<f64>| {
            let y = lay.dense[i].forward(p, &x);
            tr.dense_io.push((x, y.clone()));
            y
        };
        let head_in = match self.architecture {
            Architecture::M1 | Architecture::M6 | Architecture::M4 => {
                tr.lstm.push(lay.lstm[0].forward(p, &xs));
                let mut h = tr.lstm[0].last().to_vec();
                match self.architecture {
                    Architecture::M6 => h.extend_from_slice(ex.statics.unwrap()),
                    Architecture::M4 => {
                        let z = dense(&mut tr, 0, ex.statics.unwrap().to_vec());
                        h.extend(z);
                        h = dense(&mut tr, 1, h);
                    }
                    _ => {}
                }
                h
            }
            Architecture::M2 => {
                tr.lstm.push(lay.lstm[0].forward(p, &xs));
                let mid: Vec<&[f64]> = tr.lstm[0].h[1..].iter().map(|v| v.as_slice()).collect();
                let top = lay.lstm[1].forward(p, &mid);
                let h = top.last().to_vec();
                tr.lstm.push(top);
                h
            }
            Architecture::M3 => {
                let rev: Vec<&[f64]> = xs.iter().rev().copied().collect();
                tr.lstm.push(lay.lstm[0].forward(p, &xs));
                tr.lstm.push(lay.lstm[1].forward(p, &rev));
                let mut h = tr.lstm[0].last().to_vec();
                h.extend_from_slice(tr.lstm[1].last());
                h
            }
            Architecture::M5 => {
                let s = ex.statics.unwrap();
                tr.augmented = xs.iter().map(|x| [*x, s].concat()).collect();
                let aug: Vec<&[f64]> = tr.augmented.iter().map(|v| v.as_slice()).collect();
                tr.lstm.push(lay.lstm[0].forward(p, &aug));
                tr.lstm[0].last().to_vec()
            }
            Architecture::M7 => {
                let mut v = ex.window.to_vec();
                v.extend_from_slice(ex.statics.unwrap());
                dense(&mut tr, 0, v)
            }
        };
        let last = lay.dense.len() - 1;
        tr.output = dense(&mut tr, last, head_in)[0];
        Ok(tr)
    }

    /// Accumulates `d loss / d params` into `grad` given `dy = d loss / d output`.
    pub fn backward(&self, ex: Example, tr: &Trace, dy: f64, grad: &mut [f64]) {
        let lay = layout(self.architecture, self.dims);
        let p = &self.params;
        let xs = self.steps(ex.window);
        let h = self.dims.hidden;
        let t = xs.len();
        let dense_back = |i: usize, d: &[f64], grad: &mut [f64]| {
            let (x, y) = &tr.dense_io[i];
            lay.dense[i].backward(p, x, y, d, grad)
        };
        let at_last = |d: &[f64]| {
            let mut v = vec![vec![0.0; h]; t];
            v[t - 1].copy_from_slice(d);
            v
        };
        let last = lay.dense.len() - 1;
        let d_head = dense_back(last, &[dy], grad);
        match self.architecture {
            Architecture::M1 | Architecture::M6 => {
                lay.lstm[0].backward(p, &xs, &tr.lstm[0], &at_last(&d_head[..h]), grad);
            }
            Architecture::M4 => {
                let d_cat = dense_back(1, &d_head, grad);
                dense_back(0, &d_cat[h..], grad);
                lay.lstm[0].backward(p, &xs, &tr.lstm[0], &at_last(&d_cat[..h]), grad);
            }
            Architecture::M2 => {
                let mid: Vec<&[f64]> = tr.lstm[0].h[1..].iter().map(|v| v.as_slice()).collect();
                let d_mid = lay.lstm[1].backward(p, &mid, &tr.lstm[1], &at_last(&d_head), grad);
                lay.lstm[0].backward(p, &xs, &tr.lstm[0], &d_mid, grad);
            }
            Architecture::M3 => {
                let rev: Vec<&[f64]> = xs.iter().rev().copied().collect();
                lay.lstm[0].backward(p, &xs, &tr.lstm[0], &at_last(&d_head[..h]), grad);
                lay.lstm[1].backward(p, &rev, &tr.lstm[1], &at_last(&d_head[h..]), grad);
            }
            Architecture::M5 => {
                let aug: Vec<&[f64]> = tr.augmented.iter().map(|v| v.as_slice()).collect();
                lay.lstm[0].backward(p, &aug, &tr.lstm[0], &at_last(&d_head), grad);
            }
            Architecture::M7 => {
                dense_back(0, &d_head, grad);
            }
        }
    }

    /// Squared-error loss of a batch and its gradient.
    pub fn loss_and_grad(&self, batch: &[Example], targets: &[f64], reduction: Reduction) -> Result<(f64, Vec<f64>)> {
        if batch.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: batch.len(),
                right: targets.len(),
            });
        }
        let scale = match reduction {
            Reduction::Mean => 1.0 / batch.len().max(1) as f64,
            Reduction::Sum => 1.0,
        };
        let mut grad = vec![0.0; self.n_params()];
        let mut loss = 0.0;
        for (ex, &y) in batch.iter().zip(targets) {
            let tr = self.forward_trace(*ex)?;
            let e = tr.output - y;
            loss += e * e;
            self.backward(*ex, &tr, 2.0 * e * scale, &mut grad);
        }
        Ok((loss * scale, grad))
    }

    pub fn loss(&self, batch: &[Example], targets: &[f64], reduction: Reduction) -> Result<f64> {
        let mut loss = 0.0;
        for (ex, &y) in batch.iter().zip(targets) {
            let e = self.forward(*ex)? - y;
            loss += e * e;
        }
        Ok(match reduction {
            Reduction::Mean => loss / batch.len().max(1) as f64,
            Reduction::Sum => loss,
        })
    }
}

/// Outcome of comparing analytic and central-difference gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_param: usize,
    pub n_params: usize,
}

/// Floor on the denominator of the relative error, so that components
/// that are zero up to rounding do not dominate.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Relative error `|a - n| / max(|a|, |n|, floor)` per parameter with
/// central differences of the given step.
pub fn gradient_check(net: &Network, batch: &[Example], targets: &[f64], step: f64) -> Result<GradCheck> {
    let (_, analytic) = net.loss_and_grad(batch, targets, Reduction::Mean)?;
    let mut probe = net.clone();
    let mut worst = (0.0f64, 0);
    for i in 0..net.n_params() {
        let orig = net.params[i];
        probe.params[i] = orig + step;
        let up = probe.loss(batch, targets, Reduction::Mean)?;
        probe.params[i] = orig - step;
        let down = probe.loss(batch, targets, Reduction::Mean)?;
        probe.params[i] = orig;
        let numeric = (up - down) / (2.0 * step);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        if rel > worst.0 {
            worst = (rel, i);
        }
    }
    Ok(GradCheck {
        max_rel_error: worst.0,
        worst_param: worst.1,
        n_params: net.n_params(),
    })
}
