use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::SignalSegment;
use crate::error::{invalid, Error, Result};

/// Baseline-drift removal settings: a moving-minimum envelope smoothed by a
/// least-squares polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub window_samples: usize,
    pub poly_order: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        // 1.5 s at 125 Hz: longer than a cardiac cycle, so the envelope follows
        // the diastolic troughs.
        Self {
            window_samples: 188,
            poly_order: 4,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_samples < 2 {
            return Err(invalid("baseline window must be at least 2 samples"));
        }
        if !(1..=10).contains(&self.poly_order) {
            return Err(invalid(format!(
                "baseline polynomial order must be in 1..=10, got {}",
                self.poly_order
            )));
        }
        Ok(())
    }
}

/// Centered moving minimum, truncated at the boundaries.
///
/// Odd windows span `[i - w/2, i + w/2]`; even windows span
/// `[i - w/2, i + w/2 - 1]` (one more sample behind than ahead).
pub fn moving_min(x: &[f64], window: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(invalid("moving_min on empty input"));
    }
    if window == 0 || window > x.len() {
        return Err(invalid(format!("moving_min window {window} outside 1..={}", x.len())));
    }
    let behind = window / 2;
    let ahead = window - 1 - behind;
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    // Indices into x whose values are increasing front to back.
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + ahead).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&j| x[j] >= x[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(behind);
        while dq.front().is_some_and(|&j| j < lo) {
            dq.pop_front();
        }
        out.push(x[*dq.front().expect("window is never empty")]);
    }
    Ok(out)
}

/// Least-squares polynomial, held in a centered and scaled basis for
/// conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    center: f64,
    scale: f64,
    /// Ascending powers of `(x - center) / scale`.
    scaled: Vec<f64>,
}

impl Polynomial {
    pub fn order(&self) -> usize {
        self.scaled.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.scale;
        self.scaled.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Coefficients in ascending powers of the raw abscissa.
    pub fn coefficients(&self) -> Vec<f64> {
        let m = self.scaled.len();
        let mut out = vec![0.0; m];
        for (k, &a) in self.scaled.iter().enumerate() {
            let ak = a / self.scale.powi(k as i32);
            // (x - c)^k = sum_j C(k, j) x^j (-c)^(k-j)
            let mut binom = 1.0;
            for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
                *slot += ak * binom * (-self.center).powi((k - j) as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }
}

/// Fits a polynomial of the given order by Householder QR.
pub fn polyfit(points_x: &[f64], points_y: &[f64], order: usize) -> Result<Polynomial> {
    if points_x.len() != points_y.len() {
        return Err(invalid(format!(
            "polyfit length mismatch: {} x vs {} y",
            points_x.len(),
            points_y.len()
        )));
    }
    let n = points_x.len();
    let m = order + 1;
    if n < m {
        return Err(Error::SingularFit(format!(
            "{n} points cannot determine an order-{order} polynomial"
        )));
    }
    if points_x.iter().chain(points_y).any(|v| !v.is_finite()) {
        return Err(invalid("polyfit input contains non-finite values"));
    }
    let (lo, hi) = super::min_max(points_x);
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };

    // Column-major Vandermonde matrix.
    let mut a = vec![0.0; n * m];
    for (i, &x) in points_x.iter().enumerate() {
        let t = (x - center) / scale;
        let mut p = 1.0;
        for k in 0..m {
            a[k * n + i] = p;
            p *= t;
        }
    }
    let mut b = points_y.to_vec();
    let mut diag = vec![0.0; m];
    for k in 0..m {
        let col = &mut a[k * n..(k + 1) * n];
        let norm = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::SingularFit(format!("column {k} is zero")));
        }
        let alpha = if col[k] > 0.0 { -norm } else { norm };
        col[k] -= alpha;
        let vnorm2 = col[k..].iter().map(|v| v * v).sum::<f64>();
        diag[k] = alpha;
        // Reflect the remaining columns and the right-hand side.
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let v = &head[k * n + k..(k + 1) * n];
        for j in 0..(m - k - 1) {
            let cj = &mut tail[j * n + k..(j + 1) * n];
            let s = 2.0 * dot(v, cj) / vnorm2;
            cj.iter_mut().zip(v).for_each(|(c, vi)| *c -= s * vi);
        }
        let s = 2.0 * dot(v, &b[k..]) / vnorm2;
        b[k..].iter_mut().zip(v).for_each(|(c, vi)| *c -= s * vi);
    }
    let max_diag = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    if diag.iter().any(|d| d.abs() <= 1e-12 * max_diag) {
        return Err(Error::SingularFit(
            "design matrix is rank deficient (repeated abscissae?)".into(),
        ));
    }
    let mut coef = vec![0.0; m];
    for k in (0..m).rev() {
        let mut acc = b[k];
        for j in (k + 1)..m {
            acc -= a[j * n + k] * coef[j];
        }
        coef[k] = acc / diag[k];
    }
    Ok(Polynomial {
        center,
        scale,
        scaled: coef,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn polyfit_eval(points_x: &[f64], points_y: &[f64], order: usize, eval_x: &[f64]) -> Result<Vec<f64>> {
    let p = polyfit(points_x, points_y, order)?;
    Ok(eval_x.iter().map(|&x| p.eval(x)).collect())
}

/// Subtracts a polynomial fit of the moving-minimum envelope.
pub fn correct_baseline(seg: &SignalSegment, cfg: &BaselineConfig) -> Result<SignalSegment> {
    cfg.validate()?;
    if seg.len() < cfg.window_samples {
        return Err(Error::Length {
            needed: cfg.window_samples,
            got: seg.len(),
        });
    }
    let envelope = moving_min(seg.samples(), cfg.window_samples)?;
    let idx: Vec<f64> = (0..seg.len()).map(|i| i as f64).collect();
    let baseline = polyfit_eval(&idx, &envelope, cfg.poly_order, &idx)?;
    let out = seg.samples().iter().zip(&baseline).map(|(x, b)| x - b).collect();
    Ok(seg.with_samples(out, seg.units()))
}
