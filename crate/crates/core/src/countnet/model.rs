//! One-hidden-layer ReLU regressor with a frozen input standardizer.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::rng;

pub const DEFAULT_HIDDEN: usize = 64;

/// Per-feature affine map `(x − mean) / scale`, fixed after first training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..d).map(|i| x.iter().map(|r| r[i]).sum::<f64>() / n).collect();
        let scale = (0..d)
            .map(|i| {
                let var = x.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Parameters are stored flat as `[W1 (hidden × input, row-major), b1, w2, b2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountModel {
    pub input_dim: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
    pub standardizer: Option<Standardizer>,
}

/// Activations kept from the forward pass for backpropagation.
struct Trace {
    z: Vec<f64>,
    h: Vec<f64>,
    out: f64,
}

impl CountModel {
    pub fn n_params(input_dim: usize, hidden: usize) -> usize {
        hidden * input_dim + hidden + hidden + 1
    }

    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input_dim,
            hidden,
            params: vec![0.0; Self::n_params(input_dim, hidden)],
            standardizer: None,
        }
    }

    /// He-normal hidden weights, scaled-normal output weights, zero biases.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut m = Self::zeros(input_dim, hidden);
        let mut g = rng(seed);
        let w1 = Normal::new(0.0, (2.0 / input_dim as f64).sqrt()).expect("valid std");
        let w2 = Normal::new(0.0, (1.0 / hidden as f64).sqrt()).expect("valid std");
        let (a, b) = (hidden * input_dim, hidden * input_dim + hidden);
        for p in &mut m.params[..a] {
            *p = w1.sample(&mut g);
        }
        for p in &mut m.params[b..b + hidden] {
            *p = w2.sample(&mut g);
        }
        m
    }

    fn w1(&self) -> &[f64] {
        &self.params[..self.hidden * self.input_dim]
    }

    fn b1(&self) -> &[f64] {
        let s = self.hidden * self.input_dim;
        &self.params[s..s + self.hidden]
    }

    fn w2(&self) -> &[f64] {
        let s = self.hidden * self.input_dim + self.hidden;
        &self.params[s..s + self.hidden]
    }

    pub fn output_bias(&self) -> f64 {
        *self.params.last().expect("non-empty parameters")
    }

    pub fn set_output_bias(&mut self, b: f64) {
        *self.params.last_mut().expect("non-empty parameters") = b;
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(invalid(format!(
                "model expects {} features, got {}",
                self.input_dim,
                x.len()
            )));
        }
        Ok(())
    }

    fn prepare(&self, x: &[f64]) -> Vec<f64> {
        match &self.standardizer {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        }
    }

    fn forward(&self, x: &[f64]) -> Trace {
        let (w1, b1, w2) = (self.w1(), self.b1(), self.w2());
        let d = self.input_dim;
        let mut z = Vec::with_capacity(self.hidden);
        let mut h = Vec::with_capacity(self.hidden);
        let mut out = self.output_bias();
        for j in 0..self.hidden {
            let row = &w1[j * d..(j + 1) * d];
            let zj = b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            let hj = zj.max(0.0);
            out += w2[j] * hj;
            z.push(zj);
            h.push(hj);
        }
        Trace { z, h, out }
    }

    /// Raw (unclamped) count estimate.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.forward(&self.prepare(x)).out
    }

    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Mean squared error over a set.
    pub fn mse(&self, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
        let n = xs.len().max(1) as f64;
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (self.predict(x) - y).powi(2))
            .sum::<f64>()
            / n
    }

    /// MSE and its gradient w.r.t. `params` over the given samples. `scales`
    /// optionally multiplies each raw feature vector before standardization.
    pub fn loss_and_grad(&self, xs: &[&[f64]], ys: &[f64], scales: Option<&[f64]>) -> (f64, Vec<f64>) {
        let d = self.input_dim;
        let hsz = self.hidden;
        let mut grad = vec![0.0; self.params.len()];
        let n = xs.len() as f64;
        let mut loss = 0.0;
        let w2 = self.w2().to_vec();
        let (o_b1, o_w2, o_b2) = (hsz * d, hsz * d + hsz, hsz * d + 2 * hsz);
        for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
            let x = match scales {
                Some(k) => self.prepare(&x.iter().map(|v| v * k[i]).collect::<Vec<_>>()),
                None => self.prepare(x),
            };
            let tr = self.forward(&x);
            let r = tr.out - y;
            loss += r * r;
            let dout = 2.0 * r / n;
            grad[o_b2] += dout;
            for j in 0..hsz {
                grad[o_w2 + j] += dout * tr.h[j];
                if tr.z[j] > 0.0 {
                    let dz = dout * w2[j];
                    grad[o_b1 + j] += dz;
                    let row = &mut grad[j * d..(j + 1) * d];
                    for (g, v) in row.iter_mut().zip(&x) {
                        *g += dz * v;
                    }
                }
            }
        }
        (loss / n, grad)
    }
}
