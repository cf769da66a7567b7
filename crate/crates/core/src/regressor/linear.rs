use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::target_scale;
use crate::error::{invalid, Error, Result};

/// Plain SGD on squared error with an L2 penalty and an inverse-scaling
/// step size `learning_rate / t^power_t`, `t` counting updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdSpec {
    pub alpha: f64,
    pub learning_rate: f64,
    pub power_t: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SgdSpec {
    fn default() -> Self {
        Self {
            alpha: 1e-4,
            learning_rate: 0.01,
            power_t: 0.25,
            max_epochs: 200,
            seed: 0,
        }
    }
}

/// Returns weights and intercept for standardized inputs and targets plus
/// the target scaling.
pub(crate) fn fit(
    x: &[f64],
    y: &[f64],
    f: usize,
    spec: &SgdSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, f64, f64)> {
    if !(spec.alpha >= 0.0) || spec.max_epochs == 0 || !(spec.learning_rate > 0.0) {
        return Err(invalid("SGD needs alpha >= 0, a positive rate and at least one epoch"));
    }
    let (y_mean, y_std) = target_scale(y);
    let mut w = vec![0.0; f];
    let mut b = 0.0;
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..y.len()).collect();
    for _ in 0..spec.max_epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = spec.learning_rate / (t as f64).powf(spec.power_t);
            let z = &x[i * f..(i + 1) * f];
            let pred = w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + b;
            let d = pred - (y[i] - y_mean) / y_std;
            for (wk, zk) in w.iter_mut().zip(z) {
                *wk -= eta * (d * zk + spec.alpha * *wk);
            }
            b -= eta * d;
        }
        if !b.is_finite() {
            return Err(Error::Numeric("SGD diverged".into()));
        }
    }
    w.iter_mut().for_each(|v| *v = *v as f32 as f64);
    Ok((w, b as f32 as f64, y_mean, y_std))
}
