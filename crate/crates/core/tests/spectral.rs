use std::f64::consts::PI;

use bpae_core::signal::{design_bandpass, resample_to_125, FS};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

fn spectrum(x: &[f64], n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().take(n / 2 + 1).map(|c| c.norm()).collect()
}

#[test]
fn filter_magnitude_matches_fft_of_taps() {
    let f = design_bandpass(FS, 0.5, 8.0, 65).unwrap();
    let n = 4096;
    let mag = spectrum(&f.taps, n);
    for (k, m) in mag.iter().enumerate().step_by(7) {
        let hz = k as f64 * FS / n as f64;
        assert!(
            (f.magnitude(hz) - m).abs() < 1e-9,
            "{hz} Hz: {} vs {m}",
            f.magnitude(hz)
        );
    }
    let at = |hz: f64| mag[(hz * n as f64 / FS).round() as usize];
    // 65 taps leave a short, rippled passband.
    for hz in [2.0, 3.0, 4.0, 5.0, 6.0, 7.0] {
        assert!((at(hz) - 1.0).abs() < 0.25, "passband {hz} Hz: {}", at(hz));
    }
    // Windowed-sinc edge: half amplitude at the cutoff, falling monotonically.
    assert!((at(8.0) - 0.5).abs() < 0.05, "cutoff: {}", at(8.0));
    assert!(at(6.0) > at(8.0) && at(8.0) > at(10.0));
    for hz in [15.0, 25.0, 40.0, 60.0] {
        assert!(at(hz) < 0.05, "stopband {hz} Hz: {}", at(hz));
    }
    assert!(at(0.0) < 0.05);
}

#[test]
fn resampled_tones_keep_their_frequency() {
    let n_in = 16_000;
    for hz in [1.0, 5.0, 12.5, 30.0, 50.0] {
        let x: Vec<f64> = (0..n_in).map(|i| (2.0 * PI * hz * i as f64 / 1000.0).sin()).collect();
        let y = resample_to_125(&x).unwrap();
        assert_eq!(y.len(), n_in / 8);
        let n = 8192;
        let win: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, v)| v * (0.5 - 0.5 * (2.0 * PI * i as f64 / (y.len() - 1) as f64).cos()))
            .collect();
        let s = spectrum(&win, n);
        let peak = (1..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        let peak_hz = peak as f64 * FS / n as f64;
        assert!((peak_hz - hz).abs() <= FS / n as f64, "{hz} Hz tone peaks at {peak_hz}");
    }
}

#[test]
fn resampling_removes_content_above_output_nyquist() {
    let x: Vec<f64> = (0..16_000)
        .map(|i| {
            let t = i as f64 / 1000.0;
            (2.0 * PI * 5.0 * t).sin() + (2.0 * PI * 180.0 * t).sin() + (2.0 * PI * 310.0 * t).sin()
        })
        .collect();
    let y = resample_to_125(&x).unwrap();
    let core = &y[100..y.len() - 100];
    let s = spectrum(core, core.len());
    let total: f64 = s.iter().map(|v| v * v).sum();
    let near5: f64 = s
        .iter()
        .enumerate()
        .filter(|(k, _)| ((*k as f64 * FS / core.len() as f64) - 5.0).abs() < 1.0)
        .map(|(_, v)| v * v)
        .sum();
    assert!(near5 / total > 0.999, "in-band share {}", near5 / total);
}
