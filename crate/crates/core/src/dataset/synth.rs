use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::labels::LabelTable;
use super::store::SegmentStore;
use crate::error::{invalid, Result};
use crate::quality::{extract_label, screen_segment, ScreenConfig, SegmentLabel};
use crate::signal::{Channel, SignalSegment, Units, FS, SEGMENT_LEN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub sbp_range: (f64, f64),
    pub dbp_range: (f64, f64),
    pub heart_rate_bpm: (f64, f64),
    pub segment_length: usize,
    /// Raw context samples on each side of the segment.
    pub margin: usize,
    pub segments_per_subject: usize,
    /// Additive Gaussian noise on PPG and ECG, in raw units.
    pub noise_std: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sbp_range: (95.0, 170.0),
            dbp_range: (55.0, 100.0),
            heart_rate_bpm: (50.0, 120.0),
            segment_length: SEGMENT_LEN,
            margin: 66,
            segments_per_subject: 1,
            noise_std: 0.003,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    /// Raw PPG, ECG and ABP (mmHg) windows with context margins.
    pub store: SegmentStore,
    pub labels: LabelTable,
}

/// Pulse morphology shared by PPG and ABP: a systolic Gaussian plus a
/// reflected-wave Gaussian per cycle. `reflection` (0..1) raises and advances
/// the reflected wave; `stiffness` (0..1) widens the systolic upstroke.
#[derive(Debug, Clone, Copy)]
struct Morphology {
    systolic_width: f64,
    reflection_amp: f64,
    reflection_delay: f64,
    lo: f64,
    hi: f64,
}

const SYSTOLIC_PHASE: f64 = 0.2;
const REFLECTION_WIDTH: f64 = 0.10;

impl Morphology {
    fn new(reflection: f64, stiffness: f64) -> Self {
        let mut m = Self {
            systolic_width: 0.06 + 0.04 * stiffness,
            reflection_amp: 0.25 + 0.45 * reflection,
            reflection_delay: 0.24 - 0.08 * reflection,
            lo: 0.0,
            hi: 1.0,
        };
        let grid: Vec<f64> = (0..4096).map(|i| m.raw(i as f64 / 4096.0)).collect();
        let (lo, hi) = crate::signal::min_max(&grid);
        m.lo = lo;
        m.hi = hi;
        m
    }

    fn raw(&self, phase: f64) -> f64 {
        let gauss = |center: f64, width: f64| -> f64 {
            (-1..=1)
                .map(|k| {
                    let d = phase + k as f64 - center;
                    (-d * d / (2.0 * width * width)).exp()
                })
                .sum()
        };
        gauss(SYSTOLIC_PHASE, self.systolic_width)
            + self.reflection_amp * gauss(SYSTOLIC_PHASE + self.reflection_delay, REFLECTION_WIDTH)
    }

    /// Periodic waveform on [0, 1].
    fn unit(&self, phase: f64) -> f64 {
        (self.raw(phase.rem_euclid(1.0)) - self.lo) / (self.hi - self.lo)
    }
}

fn ecg_wave(phase: f64) -> f64 {
    let p = phase.rem_euclid(1.0);
    (-1..=1)
        .map(|k| {
            let d = p + k as f64;
            let r = (-d * d / (2.0 * 0.012f64.powi(2))).exp();
            let t = (-(d - 0.3).powi(2) / (2.0 * 0.04f64.powi(2))).exp();
            r + 0.15 * t
        })
        .sum()
}

/// Generates `n` instances whose ABP levels are determined by the PPG pulse
/// shape. Every instance passes default screening on its central window and
/// labels to within 1 mmHg of the drawn pressures; draws that would not are
/// repeated.
pub fn synth_generate(n: usize, seed: u64, cfg: &SynthConfig) -> Result<SynthOutput> {
    let (s_lo, s_hi) = cfg.sbp_range;
    let (d_lo, d_hi) = cfg.dbp_range;
    let screen = ScreenConfig::default();
    if !(s_lo < s_hi && d_lo < d_hi) {
        return Err(invalid("synthetic pressure ranges must be non-empty"));
    }
    if s_lo < screen.sbp_min || s_hi > screen.sbp_max || d_lo < screen.dbp_min || d_hi > screen.dbp_max {
        return Err(invalid("synthetic pressure ranges must lie within the screening gates"));
    }
    if cfg.heart_rate_bpm.0 <= 0.0 || cfg.heart_rate_bpm.0 > cfg.heart_rate_bpm.1 {
        return Err(invalid("bad heart-rate range"));
    }
    let per_subject = cfg.segments_per_subject.max(1);
    let total = cfg.segment_length + 2 * cfg.margin;
    let mut store = SegmentStore::new(total, vec![Channel::Ppg, Channel::Ecg, Channel::Abp])?;
    let mut labels = LabelTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.noise_std.max(0.0)).map_err(|e| invalid(e.to_string()))?;

    for i in 0..n {
        let subject = format!("synth-{:06}", i / per_subject);
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 1000 {
                return Err(crate::Error::Numeric(format!(
                    "could not draw a valid synthetic instance {i}"
                )));
            }
            let reflection: f64 = rng.gen();
            let stiffness: f64 = rng.gen();
            let sbp = s_lo + reflection * (s_hi - s_lo);
            let dbp = d_lo + stiffness * (d_hi - d_lo);
            let hr = rng.gen_range(cfg.heart_rate_bpm.0..=cfg.heart_rate_bpm.1);
            let phase0: f64 = rng.gen();
            let drift_slope: f64 = rng.gen_range(-0.05..0.05);
            let drift_phase: f64 = rng.gen_range(0.0..2.0 * PI);
            let ppg_gain: f64 = rng.gen_range(0.5..1.5);
            let pp = sbp - dbp;
            if !(25.0..=110.0).contains(&pp) {
                continue;
            }
            let morph = Morphology::new(reflection, stiffness);
            let cycles_per_sample = hr / 60.0 / FS;
            let phase = |t: usize| phase0 + t as f64 * cycles_per_sample;
            let duration = total as f64;

            let abp: Vec<f64> = (0..total).map(|t| dbp + pp * morph.unit(phase(t))).collect();
            // The PPG lags the pressure wave by a fixed fraction of a cycle.
            let ppg: Vec<f64> = (0..total)
                .map(|t| {
                    let drift =
                        drift_slope * t as f64 / duration + 0.03 * (2.0 * PI * 0.1 * t as f64 / FS + drift_phase).sin();
                    ppg_gain * morph.unit(phase(t) - 0.08) + drift + noise.sample(&mut rng)
                })
                .collect();
            let ecg: Vec<f64> = (0..total)
                .map(|t| ecg_wave(phase(t) + 0.12) + noise.sample(&mut rng))
                .collect();

            let label = SegmentLabel::new(sbp, dbp, subject.clone())?;
            if !passes(&[&ppg, &ecg, &abp], cfg, &label, &screen)? {
                continue;
            }
            store.push(i as u64, &[&ppg, &ecg, &abp])?;
            labels.rows.push((i as u64, label));
            break;
        }
    }
    Ok(SynthOutput { store, labels })
}

fn passes(raw: &[&Vec<f64>; 3], cfg: &SynthConfig, label: &SegmentLabel, screen: &ScreenConfig) -> Result<bool> {
    let core = |x: &Vec<f64>| -> Vec<f64> {
        x[cfg.margin..cfg.margin + cfg.segment_length]
            .iter()
            .map(|&v| v as f32 as f64)
            .collect()
    };
    let ppg = SignalSegment::new(core(raw[0]), FS, Channel::Ppg, Units::Normalized)?;
    let ecg = SignalSegment::new(core(raw[1]), FS, Channel::Ecg, Units::Normalized)?;
    let abp = SignalSegment::new(core(raw[2]), FS, Channel::Abp, Units::MmHg)?;
    let Ok(measured) = extract_label(&abp, &screen.peaks) else {
        return Ok(false);
    };
    if (measured.sbp - label.sbp).abs() > 1.0 || (measured.dbp - label.dbp).abs() > 1.0 {
        return Ok(false);
    }
    Ok(screen_segment(&[ppg, ecg, abp], label, screen).is_accept())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generates_requested_count_deterministically() {
        let cfg = SynthConfig::default();
        let a = synth_generate(100, 7, &cfg).unwrap();
        assert_eq!(a.store.len(), 100);
        assert_eq!(a.labels.rows.len(), 100);
        for (_, l) in &a.labels.rows {
            assert!(l.sbp >= cfg.sbp_range.0 && l.sbp <= cfg.sbp_range.1);
            assert!(l.dbp >= cfg.dbp_range.0 && l.dbp <= cfg.dbp_range.1);
        }
        let b = synth_generate(100, 7, &cfg).unwrap();
        assert_eq!(a.store.to_bytes(), b.store.to_bytes());
        assert_ne!(
            a.store.to_bytes(),
            synth_generate(100, 8, &cfg).unwrap().store.to_bytes()
        );
    }

    #[test]
    fn labels_match_generated_abp() {
        let cfg = SynthConfig::default();
        let out = synth_generate(30, 3, &cfg).unwrap();
        let peaks = ScreenConfig::default().peaks;
        for (pos, (_, l)) in out.labels.rows.iter().enumerate() {
            let abp: Vec<f64> = out.store.channel_samples(pos, Channel::Abp).unwrap()
                [cfg.margin..cfg.margin + cfg.segment_length]
                .iter()
                .map(|&v| v as f64)
                .collect();
            let seg = SignalSegment::new(abp, FS, Channel::Abp, Units::MmHg).unwrap();
            let m = extract_label(&seg, &peaks).unwrap();
            assert!((m.sbp - l.sbp).abs() <= 1.0 && (m.dbp - l.dbp).abs() <= 1.0);
        }
    }

    #[test]
    fn morphology_tracks_pressures() {
        // The reflected-wave amplitude and systolic width are affine in the
        // drawn SBP and DBP, so their correlation is 1 by construction.
        let out = synth_generate(200, 11, &SynthConfig::default()).unwrap();
        let sbp: Vec<f64> = out.labels.rows.iter().map(|(_, l)| l.sbp).collect();
        let amp: Vec<f64> = sbp
            .iter()
            .map(|s| Morphology::new((s - 95.0) / 75.0, 0.5).reflection_amp)
            .collect();
        assert!(crate::signal::correlation(&sbp, &amp).unwrap() >= 0.9);
    }

    #[test]
    fn ranges_must_fit_gates() {
        let cfg = SynthConfig {
            sbp_range: (70.0, 150.0),
            ..SynthConfig::default()
        };
        assert!(synth_generate(1, 0, &cfg).is_err());
    }
}
