use super::filter::{design_lowpass, filter_valid};
use crate::error::{invalid, Result};

const DECIMATION: usize = 8;
const AA_TAPS: usize = 161;
/// Anti-alias cutoff for 1000 Hz -> 125 Hz, below the new Nyquist of 62.5 Hz.
const AA_CUTOFF_HZ: f64 = 50.0;

/// 1000 Hz to 125 Hz. Trailing samples beyond a multiple of 8 are dropped.
pub fn resample_to_125(x: &[f64]) -> Result<Vec<f64>> {
    decimate(x, 1000.0, DECIMATION, AA_CUTOFF_HZ, AA_TAPS)
}

/// Anti-alias lowpass then keep every `factor`-th sample. Edges are extended
/// by point reflection, which keeps both level and slope continuous.
pub fn decimate(x: &[f64], fs: f64, factor: usize, cutoff: f64, taps: usize) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(invalid("cannot resample an empty signal"));
    }
    if factor == 0 {
        return Err(invalid("decimation factor must be positive"));
    }
    let usable = x.len() / factor * factor;
    if usable == 0 {
        return Ok(Vec::new());
    }
    let x = &x[..usable];
    let h = design_lowpass(fs, cutoff, taps)?;
    let half = (taps - 1) / 2;
    let padded = point_reflect_pad(x, half);
    let smoothed = filter_valid(&h, &padded);
    debug_assert_eq!(smoothed.len(), usable);
    Ok(smoothed.into_iter().step_by(factor).collect())
}

/// `2 x[0] - x[i]` on the left, `2 x[n-1] - x[n-1-i]` on the right. Inputs
/// shorter than the pad repeat the edge value beyond their length.
fn point_reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let (first, last) = (x[0], x[n - 1]);
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| 2.0 * first - x[i.min(n - 1)]));
    out.extend_from_slice(x);
    out.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i.min(n - 1)]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(freq: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / 1000.0).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn lengths_and_constant() {
        let y = resample_to_125(&vec![3.25; 8000 + 5]).unwrap();
        assert_eq!(y.len(), 1000);
        assert!(y.iter().all(|v| (v - 3.25).abs() < 1e-6));
        assert!(resample_to_125(&[]).is_err());
    }

    #[test]
    fn five_hz_amplitude_kept() {
        let y = resample_to_125(&tone(5.0, 16000)).unwrap();
        let core = &y[50..y.len() - 50];
        let peak = core.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!((peak - 1.0).abs() <= 0.05, "peak {peak}");
    }

    #[test]
    fn hundred_hz_is_suppressed() {
        let x = tone(100.0, 16000);
        let y = resample_to_125(&x).unwrap();
        assert!(rms(&y) <= 0.01 * rms(&x), "ratio {}", rms(&y) / rms(&x));
    }
}
