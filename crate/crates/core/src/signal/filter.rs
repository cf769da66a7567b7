use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Linear-phase FIR bandpass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub taps: Vec<f64>,
    pub fs: f64,
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub group_delay_samples: usize,
}

fn blackman(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64 / m;
            0.42 - 0.5 * (2.0 * PI * x).cos() + 0.08 * (4.0 * PI * x).cos()
        })
        .collect()
}

/// Windowed-sinc lowpass with unit DC gain. `cutoff` in Hz.
fn windowed_sinc(fs: f64, cutoff: f64, window: &[f64]) -> Vec<f64> {
    let fc = cutoff / fs;
    let mid = (window.len() - 1) as f64 / 2.0;
    let mut h: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let x = i as f64 - mid;
            let s = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            s * w
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= sum);
    h
}

/// Blackman-windowed sinc lowpass, unit DC gain, odd tap count.
pub fn design_lowpass(fs: f64, cutoff: f64, taps: usize) -> Result<Vec<f64>> {
    if taps.is_multiple_of(2) || taps == 0 {
        return Err(invalid(format!("tap count must be odd, got {taps}")));
    }
    if !(cutoff > 0.0 && cutoff < fs / 2.0) {
        return Err(invalid(format!(
            "lowpass cutoff {cutoff} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    Ok(windowed_sinc(fs, cutoff, &blackman(taps)))
}

/// Bandpass as the difference of two unit-gain lowpass filters.
///
/// The upper edge uses a Blackman window. The lower edge is usually far below
/// the filter's frequency resolution (0.5 Hz against roughly 2 Hz for 65 taps
/// at 125 Hz), so a tapered window would smear it across the passband; it uses
/// a rectangular window with half-weight end taps instead, whose response
/// vanishes at Nyquist. Both components have unit DC gain, so the DC response
/// is exactly zero.
pub fn design_bandpass(fs: f64, low_cut: f64, high_cut: f64, taps: usize) -> Result<FilterSpec> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(invalid(format!("sampling rate must be positive, got {fs}")));
    }
    if !(low_cut > 0.0 && low_cut < high_cut && high_cut < fs / 2.0) {
        return Err(invalid(format!(
            "band edges must satisfy 0 < {low_cut} < {high_cut} < {}",
            fs / 2.0
        )));
    }
    if taps.is_multiple_of(2) || taps < 3 {
        return Err(invalid(format!("tap count must be odd and >= 3, got {taps}")));
    }
    let high = windowed_sinc(fs, high_cut, &blackman(taps));
    let mut rect = vec![1.0; taps];
    rect[0] = 0.5;
    rect[taps - 1] = 0.5;
    let low = windowed_sinc(fs, low_cut, &rect);
    let mut h: Vec<f64> = high.iter().zip(&low).map(|(a, b)| a - b).collect();
    // Enforce exact symmetry against rounding in the two designs.
    for i in 0..taps / 2 {
        let avg = 0.5 * (h[i] + h[taps - 1 - i]);
        h[i] = avg;
        h[taps - 1 - i] = avg;
    }
    Ok(FilterSpec {
        taps: h,
        fs,
        low_cut_hz: low_cut,
        high_cut_hz: high_cut,
        group_delay_samples: (taps - 1) / 2,
    })
}

impl FilterSpec {
    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        magnitude(&self.taps, freq_hz / self.fs)
    }

    pub fn magnitude_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.magnitude(freq_hz).log10()
    }

    /// Filters `x` and shifts the result left by the group delay; edges are
    /// computed against zero padding. Output has the input's length.
    pub fn apply_compensated(&self, x: &[f64]) -> Vec<f64> {
        filter_same(&self.taps, x)
    }

    /// Delay-compensated output restricted to positions with full filter
    /// support: `x.len() - 2 * group_delay` samples, where output `j` is
    /// centered on input `j + group_delay`.
    pub fn apply_valid(&self, x: &[f64]) -> Vec<f64> {
        filter_valid(&self.taps, x)
    }
}

pub(crate) fn magnitude(taps: &[f64], cycles_per_sample: f64) -> f64 {
    let w = 2.0 * PI * cycles_per_sample;
    let (re, im) = taps.iter().enumerate().fold((0.0, 0.0), |(re, im), (k, h)| {
        (re + h * (w * k as f64).cos(), im - h * (w * k as f64).sin())
    });
    (re * re + im * im).sqrt()
}

/// `y[n] = sum_k h[k] x[n + d - k]`, zero outside `x`, `d = (taps - 1) / 2`.
pub(crate) fn filter_same(h: &[f64], x: &[f64]) -> Vec<f64> {
    let d = (h.len() - 1) / 2;
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (k, hk) in h.iter().enumerate() {
                let j = i as isize + d as isize - k as isize;
                if j >= 0 && (j as usize) < n {
                    acc += hk * x[j as usize];
                }
            }
            acc
        })
        .collect()
}

pub(crate) fn filter_valid(h: &[f64], x: &[f64]) -> Vec<f64> {
    let m = h.len();
    if x.len() < m {
        return Vec::new();
    }
    (0..=x.len() - m)
        .map(|j| {
            // Output j is centered on x[j + d]; h is symmetric so the
            // reversal is immaterial but kept explicit.
            h.iter().enumerate().map(|(k, hk)| hk * x[j + m - 1 - k]).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_filter() -> FilterSpec {
        design_bandpass(125.0, 0.5, 8.0, 65).unwrap()
    }

    #[test]
    fn group_delay_and_symmetry() {
        let f = default_filter();
        assert_eq!(f.group_delay_samples, 32);
        assert_eq!(f.taps.len(), 65);
        for i in 0..65 {
            assert_eq!(f.taps[i], f.taps[64 - i]);
        }
    }

    #[test]
    fn response_bounds() {
        let f = default_filter();
        assert!(f.magnitude_db((0.5f64 * 8.0).sqrt()) >= -1.0);
        assert!(f.magnitude(0.0) <= 1e-2);
        assert!(f.magnitude_db(0.0) <= -40.0);
        assert!(f.magnitude_db(62.5) <= -40.0);
        let g4 = f.magnitude(4.0);
        assert!((g4 - 1.0).abs() <= 0.12, "gain at 4 Hz {g4}");
    }

    #[test]
    fn dc_input_is_rejected() {
        let f = default_filter();
        let y = f.apply_valid(&vec![2.5; 400]);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(mean.abs() < 1e-3 * 2.5);
    }

    #[test]
    fn four_hz_sine_passes() {
        let f = default_filter();
        let x: Vec<f64> = (0..1024).map(|i| (2.0 * PI * 4.0 * i as f64 / 125.0).sin()).collect();
        let y = f.apply_valid(&x);
        let peak = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!((peak - 1.0).abs() <= 0.12, "peak {peak}");
    }

    #[test]
    fn compensated_filter_is_aligned() {
        let f = default_filter();
        let x: Vec<f64> = (0..1024).map(|i| (2.0 * PI * 3.0 * i as f64 / 125.0).sin()).collect();
        let y = f.apply_compensated(&x);
        let core = 100..924;
        let lag = best_lag(&x[core.clone()], &y, core.start, 5);
        assert!(lag.abs() <= 1, "lag {lag}");
        let yv = f.apply_valid(&x);
        assert_eq!(yv.len(), 1024 - 64);
        for (a, b) in yv.iter().zip(&y[32..]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn best_lag(reference: &[f64], y: &[f64], start: usize, max_lag: isize) -> isize {
        (-max_lag..=max_lag)
            .max_by(|&a, &b| {
                let c = |lag: isize| -> f64 {
                    reference
                        .iter()
                        .enumerate()
                        .map(|(i, r)| r * y[(start as isize + i as isize + lag) as usize])
                        .sum()
                };
                c(a).total_cmp(&c(b))
            })
            .unwrap()
    }

    #[test]
    fn invalid_edges_rejected() {
        assert!(design_bandpass(125.0, 0.0, 8.0, 65).is_err());
        assert!(design_bandpass(125.0, 8.0, 0.5, 65).is_err());
        assert!(design_bandpass(125.0, 0.5, 62.5, 65).is_err());
        assert!(design_bandpass(125.0, 0.5, 8.0, 64).is_err());
        assert!(design_lowpass(1000.0, 600.0, 101).is_err());
    }
}
