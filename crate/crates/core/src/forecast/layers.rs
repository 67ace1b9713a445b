//! Dense and LSTM layers over a shared flat parameter vector. Each layer
//! knows its offset into the vector; gradients accumulate into a vector of
//! the same layout.

use serde::{Deserialize, Serialize};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Tanh,
}

/// `y = act(W x + b)` with `W` stored row-major (`output x input`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub activation: Activation,
    pub offset: usize,
}

impl Dense {
    pub fn n_params(&self) -> usize {
        self.output * (self.input + 1)
    }

    pub fn fan_in(&self) -> usize {
        self.input
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.input);
        let w = &p[self.offset..self.offset + self.output * self.input];
        let b = &p[self.offset + self.output * self.input..self.offset + self.n_params()];
        (0..self.output)
            .map(|r| {
                let z = b[r] + w[r * self.input..(r + 1) * self.input].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                match self.activation {
                    Activation::Linear => z,
                    Activation::Tanh => z.tanh(),
                }
            })
            .collect()
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&self, p: &[f64], x: &[f64], y: &[f64], dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let n_w = self.output * self.input;
        let mut dx = vec![0.0; self.input];
        for r in 0..self.output {
            let dz = match self.activation {
                Activation::Linear => dy[r],
                Activation::Tanh => dy[r] * (1.0 - y[r] * y[r]),
            };
            if dz == 0.0 {
                continue;
            }
            let row = self.offset + r * self.input;
            for c in 0..self.input {
                grad[row + c] += dz * x[c];
                dx[c] += dz * p[row + c];
            }
            grad[self.offset + n_w + r] += dz;
        }
        dx
    }
}

/// LSTM with gate blocks ordered input, forget, candidate, output:
/// `W` (`4H x input`), `U` (`4H x H`), `b` (`4H`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lstm {
    pub input: usize,
    pub hidden: usize,
    pub offset: usize,
}

/// Per-step values kept for backpropagation through time.
#[derive(Debug, Clone, Default)]
pub struct LstmTrace {
    /// `h[t]` for t = 0..=T, with `h[0]` the zero initial state.
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    /// Activated gates per step, `4H` each.
    pub gates: Vec<Vec<f64>>,
}

impl LstmTrace {
    pub fn last(&self) -> &[f64] {
        self.h.last().expect("initial state present")
    }
}

impl Lstm {
    pub fn n_params(&self) -> usize {
        4 * self.hidden * (self.input + self.hidden + 1)
    }

    pub fn fan_in(&self) -> usize {
        self.input + self.hidden
    }

    fn split<'a>(&self, p: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let g = 4 * self.hidden;
        let w = self.offset;
        let u = w + g * self.input;
        let b = u + g * self.hidden;
        (&p[w..u], &p[u..b], &p[b..b + g])
    }

    pub fn forward(&self, p: &[f64], xs: &[&[f64]]) -> LstmTrace {
        let (w, u, b) = self.split(p);
        let (hd, n_in) = (self.hidden, self.input);
        let mut tr = LstmTrace {
            h: vec![vec![0.0; hd]],
            c: vec![vec![0.0; hd]],
            gates: Vec::with_capacity(xs.len()),
        };
        for x in xs {
            debug_assert_eq!(x.len(), n_in);
            let h_prev = tr.h.last().unwrap();
            let c_prev = tr.c.last().unwrap();
            let mut a = b.to_vec();
            for (r, ar) in a.iter_mut().enumerate() {
                let wr = &w[r * n_in..(r + 1) * n_in];
                let ur = &u[r * hd..(r + 1) * hd];
                *ar += wr.iter().zip(*x).map(|(p, q)| p * q).sum::<f64>()
                    + ur.iter().zip(h_prev).map(|(p, q)| p * q).sum::<f64>();
            }
            for j in 0..hd {
                a[j] = sigmoid(a[j]);
                a[hd + j] = sigmoid(a[hd + j]);
                a[2 * hd + j] = a[2 * hd + j].tanh();
                a[3 * hd + j] = sigmoid(a[3 * hd + j]);
            }
            let c: Vec<f64> = (0..hd).map(|j| a[hd + j] * c_prev[j] + a[j] * a[2 * hd + j]).collect();
            let h: Vec<f64> = (0..hd).map(|j| a[3 * hd + j] * c[j].tanh()).collect();
            tr.gates.push(a);
            tr.c.push(c);
            tr.h.push(h);
        }
        tr
    }

    /// `dh[t]` is the external gradient on the output of step t. Returns the
    /// gradient on every input vector.
    pub fn backward(&self, p: &[f64], xs: &[&[f64]], tr: &LstmTrace, dh: &[Vec<f64>], grad: &mut [f64]) -> Vec<Vec<f64>> {
        let (w, u, _) = self.split(p);
        let (hd, n_in) = (self.hidden, self.input);
        let g = 4 * hd;
        let (gw, gu, gb) = (self.offset, self.offset + g * n_in, self.offset + g * (n_in + hd));
        let steps = xs.len();
        let mut dxs = vec![vec![0.0; n_in]; steps];
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = vec![0.0; hd];
        let mut da = vec![0.0; g];
        for t in (0..steps).rev() {
            let a = &tr.gates[t];
            let (c, c_prev, h_prev) = (&tr.c[t + 1], &tr.c[t], &tr.h[t]);
            for j in 0..hd {
                let (i, f, gg, o) = (a[j], a[hd + j], a[2 * hd + j], a[3 * hd + j]);
                let dht = dh[t][j] + dh_next[j];
                let tc = c[j].tanh();
                let dc = dc_next[j] + dht * o * (1.0 - tc * tc);
                da[j] = dc * gg * i * (1.0 - i);
                da[hd + j] = dc * c_prev[j] * f * (1.0 - f);
                da[2 * hd + j] = dc * i * (1.0 - gg * gg);
                da[3 * hd + j] = dht * tc * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            let x = xs[t];
            for (r, &d) in da.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grad[gb + r] += d;
                for c in 0..n_in {
                    grad[gw + r * n_in + c] += d * x[c];
                    dxs[t][c] += d * w[r * n_in + c];
                }
                for c in 0..hd {
                    grad[gu + r * hd + c] += d * h_prev[c];
                    dh_next[c] += d * u[r * hd + c];
                }
            }
        }
        dxs
    }
}
