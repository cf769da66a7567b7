use serde::{Deserialize, Serialize};

use super::label::SegmentLabel;
use super::peaks::{detect_peaks, PeakConfig};
use crate::signal::{Channel, SignalSegment};

/// Range gates (mmHg, closed intervals) and distortion limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub sbp_min: f64,
    pub sbp_max: f64,
    pub dbp_min: f64,
    pub dbp_max: f64,
    pub pp_min: f64,
    pub pp_max: f64,
    pub interval_cv_max: f64,
    pub prominence_cv_max: f64,
    pub peaks: PeakConfig,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            sbp_min: 80.0,
            sbp_max: 190.0,
            dbp_min: 50.0,
            dbp_max: 120.0,
            pp_min: 20.0,
            pp_max: 120.0,
            interval_cv_max: 0.25,
            prominence_cv_max: 0.50,
            peaks: PeakConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SbpOutOfRange,
    DbpOutOfRange,
    PulsePressureOutOfRange,
    Blank,
    DistortedIntervals,
    DistortedProminences,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::SbpOutOfRange => "sbp_out_of_range",
            RejectReason::DbpOutOfRange => "dbp_out_of_range",
            RejectReason::PulsePressureOutOfRange => "pulse_pressure_out_of_range",
            RejectReason::Blank => "blank",
            RejectReason::DistortedIntervals => "distorted_intervals",
            RejectReason::DistortedProminences => "distorted_prominences",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject(RejectReason),
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// Population coefficient of variation; 0 for fewer than two values.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if mean == 0.0 {
        return f64::INFINITY;
    }
    var.sqrt() / mean.abs()
}

/// Applies the gates in fixed order and reports the first failure.
///
/// The distortion gates inspect the ABP and PPG channels; a channel with
/// fewer than two detectable peaks fails the interval gate.
pub fn screen_segment(channels: &[SignalSegment], label: &SegmentLabel, cfg: &ScreenConfig) -> Decision {
    let within = |v: f64, lo: f64, hi: f64| v >= lo && v <= hi;
    if !within(label.sbp, cfg.sbp_min, cfg.sbp_max) {
        return Decision::Reject(RejectReason::SbpOutOfRange);
    }
    if !within(label.dbp, cfg.dbp_min, cfg.dbp_max) {
        return Decision::Reject(RejectReason::DbpOutOfRange);
    }
    if !within(label.pulse_pressure(), cfg.pp_min, cfg.pp_max) {
        return Decision::Reject(RejectReason::PulsePressureOutOfRange);
    }
    if channels.iter().any(is_blank) {
        return Decision::Reject(RejectReason::Blank);
    }

    let inspected = || {
        channels
            .iter()
            .filter(|c| matches!(c.channel(), Channel::Abp | Channel::Ppg))
            .map(|c| detect_peaks(c.samples(), &cfg.peaks))
    };
    for peaks in inspected() {
        let intervals: Vec<f64> = peaks.intervals.iter().map(|&d| d as f64).collect();
        if peaks.len() < 2 || coefficient_of_variation(&intervals) > cfg.interval_cv_max {
            return Decision::Reject(RejectReason::DistortedIntervals);
        }
    }
    for peaks in inspected() {
        if coefficient_of_variation(&peaks.prominences) > cfg.prominence_cv_max {
            return Decision::Reject(RejectReason::DistortedProminences);
        }
    }
    Decision::Accept
}

fn is_blank(seg: &SignalSegment) -> bool {
    let (lo, hi) = seg.min_max();
    hi <= lo || seg.samples().iter().all(|&v| v == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Units, FS};
    use std::f64::consts::PI;

    fn pulses(channel: Channel, lo: f64, hi: f64, units: Units) -> SignalSegment {
        let x = (0..1024)
            .map(|i| {
                let s = 0.5 + 0.5 * (2.0 * PI * 1.25 * i as f64 / FS).sin();
                lo + (hi - lo) * s
            })
            .collect();
        SignalSegment::new(x, FS, channel, units).unwrap()
    }

    fn clean(sbp: f64, dbp: f64) -> Vec<SignalSegment> {
        vec![
            pulses(Channel::Ppg, 0.0, 1.0, Units::Normalized),
            pulses(Channel::Ecg, 0.0, 1.0, Units::Normalized),
            pulses(Channel::Abp, dbp, sbp, Units::MmHg),
        ]
    }

    fn label(sbp: f64, dbp: f64) -> SegmentLabel {
        SegmentLabel::new(sbp, dbp, "s").unwrap()
    }

    fn decide(sbp: f64, dbp: f64) -> Decision {
        screen_segment(&clean(sbp, dbp), &label(sbp, dbp), &ScreenConfig::default())
    }

    #[test]
    fn range_gate_examples() {
        assert_eq!(decide(79.0, 55.0), Decision::Reject(RejectReason::SbpOutOfRange));
        assert_eq!(
            decide(100.0, 85.0),
            Decision::Reject(RejectReason::PulsePressureOutOfRange)
        );
        assert_eq!(decide(120.0, 70.0), Decision::Accept);
        assert_eq!(decide(160.0, 121.0), Decision::Reject(RejectReason::DbpOutOfRange));
    }

    #[test]
    fn first_failure_wins() {
        // Out of range on SBP and DBP at once reports SBP.
        assert_eq!(decide(200.0, 130.0), Decision::Reject(RejectReason::SbpOutOfRange));
    }

    #[test]
    fn blank_channel() {
        let mut ch = clean(120.0, 70.0);
        ch[1] = SignalSegment::new(vec![0.0; 1024], FS, Channel::Ecg, Units::Normalized).unwrap();
        assert_eq!(
            screen_segment(&ch, &label(120.0, 70.0), &ScreenConfig::default()),
            Decision::Reject(RejectReason::Blank)
        );
    }

    #[test]
    fn irregular_rhythm_is_distorted() {
        let mut ch = clean(120.0, 70.0);
        // Runs of short cycles broken by long pauses.
        let mut x = Vec::new();
        let mut k = 0;
        while x.len() < 1024 {
            let period = if k % 4 == 3 { 200 } else { 45 };
            x.extend((0..period).map(|i| (PI * i as f64 / period as f64).sin().powi(2)));
            k += 1;
        }
        x.truncate(1024);
        ch[0] = SignalSegment::new(x, FS, Channel::Ppg, Units::Normalized).unwrap();
        assert_eq!(
            screen_segment(&ch, &label(120.0, 70.0), &ScreenConfig::default()),
            Decision::Reject(RejectReason::DistortedIntervals)
        );
    }

    #[test]
    fn uneven_heights_are_distorted() {
        let mut ch = clean(120.0, 70.0);
        // Regular timing, but every other beat is far smaller.
        let x: Vec<f64> = (0..1024)
            .map(|i| {
                let beat = i / 100;
                let amp = if beat % 2 == 0 { 1.0 } else { 0.2 };
                amp * (PI * (i % 100) as f64 / 100.0).sin().powi(2)
            })
            .collect();
        ch[0] = SignalSegment::new(x, FS, Channel::Ppg, Units::Normalized).unwrap();
        let cfg = ScreenConfig {
            peaks: PeakConfig {
                min_distance_samples: 40,
                min_prominence: 0.1,
            },
            ..ScreenConfig::default()
        };
        assert_eq!(
            screen_segment(&ch, &label(120.0, 70.0), &cfg),
            Decision::Reject(RejectReason::DistortedProminences)
        );
    }

    #[test]
    fn cv() {
        assert_eq!(coefficient_of_variation(&[5.0]), 0.0);
        assert_eq!(coefficient_of_variation(&[2.0, 2.0, 2.0]), 0.0);
        assert!((coefficient_of_variation(&[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }
}
