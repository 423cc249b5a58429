//! Dense autoencoder: input → hidden → latent → hidden → output, ReLU on the
//! three inner layers, linear output, mean-squared-error loss, Adam.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    pub latent_dim: usize,
    /// Defaults to (input + latent) / 2.
    pub hidden_dim: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            latent_dim: 32,
            hidden_dim: None,
            epochs: 200,
            learning_rate: 1e-3,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dense {
    n_in: usize,
    n_out: usize,
    /// Row-major `n_out × n_in`.
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Dense {
    fn init(n_in: usize, n_out: usize, rng: &mut seed::Rng) -> Self {
        // He-uniform weights; small positive biases keep units off the
        // ReLU kink at initialization
        let limit = (6.0 / n_in as f64).sqrt();
        Dense {
            n_in,
            n_out,
            w: (0..n_in * n_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect(),
            b: vec![0.01; n_out],
        }
    }

    fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    layers: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderFit {
    pub model: Autoencoder,
    pub initial_loss: f64,
    /// Full-data loss after each epoch.
    pub losses: Vec<f64>,
}

impl AutoencoderFit {
    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(self.initial_loss)
    }
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

impl Autoencoder {
    pub fn new(input_dim: usize, hidden_dim: usize, latent_dim: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let dims = [input_dim, hidden_dim, latent_dim, hidden_dim, input_dim];
        Autoencoder {
            layers: dims
                .windows(2)
                .map(|d| Dense::init(d[0], d[1], &mut rng))
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn latent_dim(&self) -> usize {
        self.layers[1].n_out
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(&l.b).copied())
            .collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params());
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.w.len();
            l.w.copy_from_slice(&p[off..off + nw]);
            off += nw;
            let nb = l.b.len();
            l.b.copy_from_slice(&p[off..off + nb]);
            off += nb;
        }
    }

    /// Pre-activations and activations of every layer for one sample.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x.to_vec()];
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(l.n_out);
            l.forward(acts.last().expect("input"), &mut z);
            if i + 1 < self.layers.len() {
                relu(&mut z);
            }
            acts.push(z);
        }
        acts
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        let mut z = Vec::new();
        for l in &self.layers[..2] {
            l.forward(&h, &mut z);
            relu(&mut z);
            std::mem::swap(&mut h, &mut z);
        }
        h
    }

    pub fn reconstruct(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).pop().expect("output")
    }

    /// Mean over samples and output coordinates of the squared error.
    pub fn loss(&self, batch: &[Vec<f64>]) -> f64 {
        let n = (batch.len() * self.input_dim()) as f64;
        batch
            .iter()
            .map(|x| {
                self.reconstruct(x)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n
    }

    /// Loss and its gradient with respect to `params()`.
    pub fn loss_and_grad(&self, batch: &[Vec<f64>]) -> (f64, Vec<f64>) {
        let n = (batch.len() * self.input_dim()) as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()]))
            .collect();
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for x in batch {
            let acts = self.trace(x);
            let out = &acts[last + 1];
            let mut delta: Vec<f64> = out.iter().zip(x).map(|(o, t)| 2.0 * (o - t) / n).collect();
            loss += out
                .iter()
                .zip(x)
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>();
            for li in (0..=last).rev() {
                let l = &self.layers[li];
                let input = &acts[li];
                let (gw, gb) = &mut grads[li];
                for o in 0..l.n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let row = &mut gw[o * l.n_in..(o + 1) * l.n_in];
                    for (g, a) in row.iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if li > 0 {
                    let mut prev = vec![0.0; l.n_in];
                    for o in 0..l.n_out {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        let row = &l.w[o * l.n_in..(o + 1) * l.n_in];
                        for (p, w) in prev.iter_mut().zip(row) {
                            *p += d * w;
                        }
                    }
                    // ReLU derivative, taken as 0 at the kink
                    for (p, a) in prev.iter_mut().zip(input) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        let flat = grads
            .into_iter()
            .flat_map(|(w, b)| w.into_iter().chain(b))
            .collect();
        (loss / n, flat)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + EPS);
        }
    }
}

pub fn autoencoder_fit(
    vectors: &[Vec<f64>],
    cfg: &AutoencoderConfig,
    seed: u64,
) -> Result<AutoencoderFit> {
    if vectors.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "autoencoder needs at least 2 vectors, got {}",
            vectors.len()
        )));
    }
    let input = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != input) {
        return Err(Error::DimensionMismatch {
            expected: input,
            got: v.len(),
        });
    }
    if input <= cfg.latent_dim || cfg.latent_dim == 0 {
        return Err(Error::Invalid(format!(
            "autoencoder input dim {input} must exceed latent dim {}",
            cfg.latent_dim
        )));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Invalid("batch size must be ≥ 1".into()));
    }
    let hidden = cfg.hidden_dim.unwrap_or((input + cfg.latent_dim) / 2);
    let mut model = Autoencoder::new(
        input,
        hidden,
        cfg.latent_dim,
        seed::derive(seed, &[seed::tag("init")]),
    );
    let mut rng = seed::rng(seed::derive(seed, &[seed::tag("batches")]));
    let initial_loss = model.loss(vectors);
    let mut params = model.params();
    let mut adam = Adam {
        m: vec![0.0; params.len()],
        v: vec![0.0; params.len()],
        t: 0,
        lr: cfg.learning_rate,
    };
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|i| vectors[*i].clone()));
            let (_, g) = model.loss_and_grad(&batch);
            adam.step(&mut params, &g);
            model.set_params(&params);
        }
        losses.push(model.loss(vectors));
    }
    Ok(AutoencoderFit {
        model,
        initial_loss,
        losses,
    })
}

/// ‖a − b‖ / (‖a‖ + ‖b‖), zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale =
        a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central finite-difference gradient of `loss` at the model's parameters.
pub fn numeric_gradient(model: &Autoencoder, batch: &[Vec<f64>], eps: f64) -> Vec<f64> {
    let base = model.params();
    let mut probe = model.clone();
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + eps;
            probe.set_params(&p);
            let up = probe.loss(batch);
            p[i] = base[i] - eps;
            probe.set_params(&p);
            let down = probe.loss(batch);
            (up - down) / (2.0 * eps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_data(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seed::rng(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let model = Autoencoder::new(8, 6, 3, 17);
        let batch = random_data(5, 8, 4);
        let (loss, g) = model.loss_and_grad(&batch);
        assert!((loss - model.loss(&batch)).abs() < 1e-15);
        let num = numeric_gradient(&model, &batch, 1e-6);
        let err = relative_error(&g, &num);
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn memorizes_a_constant() {
        let x: Vec<f64> = (0..10).map(|i| (i as f64) / 10.0).collect();
        let data = vec![x; 64];
        let cfg = AutoencoderConfig {
            latent_dim: 3,
            batch_size: 8,
            ..Default::default()
        };
        let fit = autoencoder_fit(&data, &cfg, 1).unwrap();
        assert!(fit.final_loss() < 1e-6, "{}", fit.final_loss());
    }

    #[test]
    fn loss_halves_on_random_data() {
        let data = random_data(60, 12, 8);
        let cfg = AutoencoderConfig {
            latent_dim: 4,
            ..Default::default()
        };
        let fit = autoencoder_fit(&data, &cfg, 5).unwrap();
        assert_eq!(fit.losses.len(), 200);
        assert!(
            fit.final_loss() < 0.5 * fit.initial_loss,
            "{} vs {}",
            fit.final_loss(),
            fit.initial_loss
        );
        let again = autoencoder_fit(&data, &cfg, 5).unwrap();
        assert_eq!(fit, again);
        assert_eq!(fit.model.encode(&data[0]).len(), 4);
    }

    #[test]
    fn errors() {
        let cfg = AutoencoderConfig::default();
        assert!(autoencoder_fit(&[vec![0.0; 40]], &cfg, 1).is_err());
        assert!(autoencoder_fit(&[vec![0.0; 8], vec![0.0; 8]], &cfg, 1).is_err());
    }
}
