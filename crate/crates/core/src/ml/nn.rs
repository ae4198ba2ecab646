//! Fully connected ReLU network with an MSE or Student's-t output head,
//! trained by mini-batch Adam.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::student_t::nll_and_gradient;
use super::{ForecastDistribution, Matrix, MlError, Normalization, StudentT, WindowedDataset};
use crate::datagen::{rng_from_seed, seed_for};

const SIGMA_FLOOR: f64 = 1e-6;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// `w_out` point forecasts, squared-error loss.
    #[default]
    Mse,
    /// `3·w_out` outputs `[μ…, σ_raw…, ν_raw…]`, Student's t NLL loss.
    StudentT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub head: Head,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_hidden() -> Vec<usize> {
    vec![20, 20]
}

fn default_epochs() -> usize {
    200
}

fn default_lr() -> f64 {
    1e-3
}

fn default_batch() -> usize {
    32
}

impl Default for NnSpec {
    fn default() -> Self {
        Self {
            name: None,
            hidden: default_hidden(),
            head: Head::Mse,
            epochs: default_epochs(),
            learning_rate: default_lr(),
            batch_size: default_batch(),
            seed: 0,
        }
    }
}

impl NnSpec {
    pub fn validate(&self) -> Result<(), MlError> {
        let bad = |m: &str| Err(MlError::InvalidParameter(m.into()));
        if self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Self { n_in, n_out, weights: vec![0.0; n_in * n_out], bias: vec![0.0; n_out] }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let w = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.bias[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
    }
}

/// Network weights. The last layer is linear; all others use ReLU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnParams {
    pub layers: Vec<Layer>,
}

impl NnParams {
    pub fn zeros(sizes: &[usize]) -> Self {
        Self { layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect() }
    }

    /// He-normal weights, zero biases.
    pub fn he_init(sizes: &[usize], seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut p = Self::zeros(sizes);
        for layer in &mut p.layers {
            let dist = Normal::new(0.0, (2.0 / layer.n_in as f64).sqrt()).expect("positive std");
            layer.weights.iter_mut().for_each(|w| *w = dist.sample(&mut rng));
        }
        p
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        for l in &self.layers {
            v.extend_from_slice(&l.weights);
            v.extend_from_slice(&l.bias);
        }
        v
    }

    pub fn set_flat(&mut self, v: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&v[k..k + nw]);
            k += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&v[k..k + nb]);
            k += nb;
        }
    }

    fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_out)
    }
}

/// Raw head outputs for one input vector.
pub fn nn_forward(params: &NnParams, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    let mut z = Vec::new();
    let last = params.layers.len().saturating_sub(1);
    for (i, layer) in params.layers.iter().enumerate() {
        layer.apply(&a, &mut z);
        if i < last {
            z.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        std::mem::swap(&mut a, &mut z);
    }
    a
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Map raw Student's t head outputs to `(μ, σ, ν)` per step.
pub(crate) fn student_t_params(raw: &[f64], w_out: usize) -> Vec<(f64, f64, f64)> {
    (0..w_out)
        .map(|h| (raw[h], softplus(raw[w_out + h]) + SIGMA_FLOOR, 2.0 + softplus(raw[2 * w_out + h])))
        .collect()
}

/// Per-sample loss and its gradient with respect to the raw outputs.
fn head_loss(head: Head, raw: &[f64], y: &[f64], grad: &mut [f64]) -> f64 {
    match head {
        Head::Mse => {
            let w = y.len() as f64;
            let mut loss = 0.0;
            for ((g, o), t) in grad.iter_mut().zip(raw).zip(y) {
                let d = o - t;
                loss += d * d / w;
                *g = 2.0 * d / w;
            }
            loss
        }
        Head::StudentT => {
            let w = y.len();
            let mut loss = 0.0;
            for (h, &(mu, sigma, nu)) in student_t_params(raw, w).iter().enumerate() {
                let (nll, [d_mu, d_sigma, d_nu]) = nll_and_gradient(mu, sigma, nu, y[h]);
                loss += nll;
                grad[h] = d_mu;
                grad[w + h] = d_sigma * sigmoid(raw[w + h]);
                grad[2 * w + h] = d_nu * sigmoid(raw[2 * w + h]);
            }
            loss
        }
    }
}

/// Mean per-sample loss over the rows of `x`/`y` and its gradient with
/// respect to the flattened parameters.
pub fn loss_and_gradient(params: &NnParams, head: Head, x: &Matrix, y: &Matrix) -> (f64, Vec<f64>) {
    let n = x.rows();
    let n_layers = params.layers.len();
    let mut grads = NnParams { layers: params.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect() };
    let mut acts: Vec<Vec<f64>> = vec![Vec::new(); n_layers + 1];
    let mut delta = Vec::new();
    let mut prev = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        acts[0].clear();
        acts[0].extend_from_slice(x.row(i));
        for (l, layer) in params.layers.iter().enumerate() {
            let (before, after) = acts.split_at_mut(l + 1);
            layer.apply(&before[l], &mut after[0]);
            if l + 1 < n_layers {
                after[0].iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        delta.clear();
        delta.resize(params.output_dim(), 0.0);
        total += head_loss(head, &acts[n_layers], y.row(i), &mut delta);

        for l in (0..n_layers).rev() {
            let layer = &params.layers[l];
            let g = &mut grads.layers[l];
            let input = &acts[l];
            for o in 0..layer.n_out {
                let d = delta[o];
                g.bias[o] += d;
                if d != 0.0 {
                    let row = &mut g.weights[o * layer.n_in..(o + 1) * layer.n_in];
                    row.iter_mut().zip(input).for_each(|(w, a)| *w += d * a);
                }
            }
            if l > 0 {
                prev.clear();
                prev.resize(layer.n_in, 0.0);
                for o in 0..layer.n_out {
                    let d = delta[o];
                    if d != 0.0 {
                        let row = &layer.weights[o * layer.n_in..(o + 1) * layer.n_in];
                        prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
                    }
                }
                // ReLU derivative from the stored post-activation
                prev.iter_mut().zip(input).for_each(|(p, a)| {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                });
                std::mem::swap(&mut delta, &mut prev);
            }
        }
    }
    let scale = 1.0 / n as f64;
    let mut flat = grads.flatten();
    flat.iter_mut().for_each(|g| *g *= scale);
    (total * scale, flat)
}

/// A trained network together with the scaling it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnModel {
    pub params: NnParams,
    pub head: Head,
    pub w_out: usize,
    /// Applied to inputs and targets alike.
    pub normalization: Normalization,
}

impl NnModel {
    /// Point forecast (the location for the Student's t head).
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let raw = nn_forward(&self.params, &self.normalization.apply_slice(x));
        raw[..self.w_out].iter().map(|&v| self.normalization.invert(v)).collect()
    }

    pub fn predict_distribution(&self, x: &[f64]) -> Option<ForecastDistribution> {
        if self.head != Head::StudentT {
            return None;
        }
        let raw = nn_forward(&self.params, &self.normalization.apply_slice(x));
        let steps = student_t_params(&raw, self.w_out)
            .into_iter()
            .map(|(mu, sigma, nu)| StudentT {
                mu: self.normalization.invert(mu),
                sigma: sigma * self.normalization.std,
                nu,
            })
            .collect();
        Some(ForecastDistribution { steps })
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(n: usize, lr: f64) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
        }
    }
}

/// Train on `ds` with He initialization and per-epoch seeded shuffling.
pub fn nn_train(ds: &WindowedDataset, spec: &NnSpec) -> Result<NnModel, MlError> {
    spec.validate()?;
    let norm = ds.normalization;
    let x = norm.apply_matrix(&ds.x);
    let y = norm.apply_matrix(&ds.y);
    let w_out = ds.w_out();
    let out_dim = match spec.head {
        Head::Mse => w_out,
        Head::StudentT => 3 * w_out,
    };
    let mut sizes = vec![ds.w_in()];
    sizes.extend_from_slice(&spec.hidden);
    sizes.push(out_dim);

    let mut params = NnParams::he_init(&sizes, seed_for(spec.seed, 0));
    let mut rng = rng_from_seed(seed_for(spec.seed, 1));
    let mut flat = params.flatten();
    let mut adam = Adam::new(flat.len(), spec.learning_rate);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    for epoch in 0..spec.epochs {
        order.shuffle(&mut rng);
        for (batch, idx) in order.chunks(spec.batch_size).enumerate() {
            let (loss, grad) = loss_and_gradient(&params, spec.head, &x.select_rows(idx), &y.select_rows(idx));
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(MlError::NonFiniteLoss { epoch, batch });
            }
            adam.step(&mut flat, &grad);
            params.set_flat(&flat);
        }
    }
    Ok(NnModel { params, head: spec.head, w_out, normalization: norm })
}
