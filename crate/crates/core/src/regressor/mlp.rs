use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::target_scale;
use crate::error::{invalid, Error, Result};
use crate::optim::{Adam, AdamConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpSpec {
    pub hidden: usize,
    /// L2 penalty on the weights.
    pub alpha: f64,
    pub learning_rate: f64,
    /// Epoch `t` uses `learning_rate / t^power_t`.
    pub power_t: f64,
    pub max_epochs: usize,
    /// `None` means `min(200, n)`.
    pub batch_size: Option<usize>,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for MlpSpec {
    fn default() -> Self {
        Self {
            hidden: 100,
            alpha: 1e-4,
            learning_rate: 1e-3,
            power_t: 0.5,
            max_epochs: 500,
            batch_size: None,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

/// One hidden ReLU layer and a linear output, trained on standardized
/// targets. Parameters are laid out `[w1 (h x f), b1 (h), w2 (h), b2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub n_features: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
    pub y_mean: f64,
    pub y_std: f64,
}

impl Mlp {
    fn offsets(f: usize, h: usize) -> (usize, usize, usize, usize) {
        (0, h * f, h * f + h, h * f + 2 * h)
    }

    pub fn n_params(f: usize, h: usize) -> usize {
        h * f + 2 * h + 1
    }

    fn init(f: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p = vec![0.0; Self::n_params(f, h)];
        let (_, _, w2, _) = Self::offsets(f, h);
        // Glorot-uniform for both layers, biases drawn alongside the weights.
        let l1 = Uniform::new_inclusive(-(6.0 / (f + h) as f64).sqrt(), (6.0 / (f + h) as f64).sqrt());
        let l2 = Uniform::new_inclusive(-(6.0 / (h + 1) as f64).sqrt(), (6.0 / (h + 1) as f64).sqrt());
        for v in &mut p[..w2] {
            *v = l1.sample(rng);
        }
        for v in &mut p[w2..] {
            *v = l2.sample(rng);
        }
        p
    }

    fn forward(p: &[f64], f: usize, h: usize, z: &[f64], hid: &mut [f64]) -> f64 {
        let (_, b1, w2, b2) = Self::offsets(f, h);
        let mut out = p[b2];
        for j in 0..h {
            let w = &p[j * f..(j + 1) * f];
            let a = w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + p[b1 + j];
            hid[j] = a.max(0.0);
            out += p[w2 + j] * hid[j];
        }
        out
    }

    /// Squared-error loss `sum (out - y)^2 / 2n + alpha |W|^2 / 2n` over the
    /// rows in `idx`, and its gradient.
    pub(crate) fn loss_and_grad(
        p: &[f64],
        f: usize,
        h: usize,
        x: &[f64],
        y: &[f64],
        idx: &[usize],
        alpha: f64,
    ) -> (f64, Vec<f64>) {
        let (_, b1, w2, b2) = Self::offsets(f, h);
        let mut g = vec![0.0; p.len()];
        let mut hid = vec![0.0; h];
        let mut loss = 0.0;
        for &i in idx {
            let z = &x[i * f..(i + 1) * f];
            let out = Self::forward(p, f, h, z, &mut hid);
            let d = out - y[i];
            loss += 0.5 * d * d;
            g[b2] += d;
            for j in 0..h {
                g[w2 + j] += d * hid[j];
                if hid[j] > 0.0 {
                    let dh = d * p[w2 + j];
                    g[b1 + j] += dh;
                    g[j * f..(j + 1) * f]
                        .iter_mut()
                        .zip(z)
                        .for_each(|(gw, v)| *gw += dh * v);
                }
            }
        }
        let n = idx.len() as f64;
        let mut penalty = 0.0;
        for (k, gk) in g.iter_mut().enumerate() {
            let is_weight = k < b1 || (w2..b2).contains(&k);
            if is_weight {
                penalty += p[k] * p[k];
                *gk += alpha * p[k];
            }
            *gk /= n;
        }
        ((loss + 0.5 * alpha * penalty) / n, g)
    }

    /// `x` holds standardized rows; `y` is in mmHg.
    pub(crate) fn fit(x: &[f64], y: &[f64], f: usize, spec: &MlpSpec, rng: &mut ChaCha8Rng) -> Result<Mlp> {
        if spec.hidden == 0 || !(spec.alpha >= 0.0) || spec.max_epochs == 0 {
            return Err(invalid("MLP needs hidden >= 1, alpha >= 0 and at least one epoch"));
        }
        let n = y.len();
        let h = spec.hidden;
        let (y_mean, y_std) = target_scale(y);
        let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
        let mut p = Self::init(f, h, rng);
        let mut adam = Adam::new(p.len(), spec.adam);
        let batch = spec.batch_size.unwrap_or(200).clamp(1, n);
        let mut order: Vec<usize> = (0..n).collect();
        for epoch in 1..=spec.max_epochs {
            let lr = spec.learning_rate / (epoch as f64).powf(spec.power_t);
            order.shuffle(rng);
            for idx in order.chunks(batch) {
                let (loss, g) = Self::loss_and_grad(&p, f, h, x, &ys, idx, spec.alpha);
                if !loss.is_finite() {
                    return Err(Error::Numeric(format!("MLP loss diverged at epoch {epoch}")));
                }
                adam.step(&mut p, &g, lr);
            }
        }
        p.iter_mut().for_each(|v| *v = *v as f32 as f64);
        Ok(Mlp {
            n_features: f,
            hidden: h,
            params: p,
            y_mean,
            y_std,
        })
    }

    pub fn predict_one(&self, z: &[f64]) -> f64 {
        let mut hid = vec![0.0; self.hidden];
        let s = Self::forward(&self.params, self.n_features, self.hidden, z, &mut hid);
        self.y_mean + self.y_std * s
    }
}
