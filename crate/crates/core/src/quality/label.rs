use serde::{Deserialize, Serialize};

use super::peaks::{detect_peaks, detect_troughs, PeakConfig};
use crate::error::{invalid, Error, Result};
use crate::signal::{SignalSegment, Units};

/// Which pressure a regressor or metric refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BpTarget {
    Sbp,
    Dbp,
}

impl BpTarget {
    pub const BOTH: [BpTarget; 2] = [BpTarget::Sbp, BpTarget::Dbp];

    pub fn name(self) -> &'static str {
        match self {
            BpTarget::Sbp => "SBP",
            BpTarget::Dbp => "DBP",
        }
    }
}

/// Ground-truth pressures of one segment, in mmHg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub sbp: f64,
    pub dbp: f64,
    pub map: f64,
    pub subject_id: String,
}

impl SegmentLabel {
    /// MAP from the standard one-third pulse-pressure estimate.
    pub fn new(sbp: f64, dbp: f64, subject_id: impl Into<String>) -> Result<Self> {
        if !(sbp.is_finite() && dbp.is_finite() && dbp > 0.0 && sbp > dbp) {
            return Err(invalid(format!("label requires sbp > dbp > 0, got {sbp}/{dbp}")));
        }
        Ok(Self {
            sbp,
            dbp,
            map: (sbp + 2.0 * dbp) / 3.0,
            subject_id: subject_id.into(),
        })
    }

    pub fn pulse_pressure(&self) -> f64 {
        self.sbp - self.dbp
    }

    pub fn value(&self, target: BpTarget) -> f64 {
        match target {
            BpTarget::Sbp => self.sbp,
            BpTarget::Dbp => self.dbp,
        }
    }
}

/// SBP/DBP as the mean systolic peak and diastolic trough amplitudes.
/// The subject id is left empty for the caller to fill.
pub fn extract_label(abp: &SignalSegment, cfg: &PeakConfig) -> Result<SegmentLabel> {
    if abp.units() != Units::MmHg {
        return Err(invalid(format!("ABP must be in mmHg, got {:?}", abp.units())));
    }
    let x = abp.samples();
    let peaks = detect_peaks(x, cfg);
    let troughs = detect_troughs(x, cfg);
    if peaks.len() < 2 || troughs.len() < 2 {
        return Err(Error::Unlabelable(format!(
            "{} systolic peaks and {} diastolic troughs (need 2 each)",
            peaks.len(),
            troughs.len()
        )));
    }
    let mean_at = |idx: &[usize]| idx.iter().map(|&i| x[i]).sum::<f64>() / idx.len() as f64;
    let sbp = mean_at(&peaks.indices);
    let dbp = mean_at(&troughs.indices);
    SegmentLabel::new(sbp, dbp, "").map_err(|e| Error::Unlabelable(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Channel, FS};
    use std::f64::consts::PI;

    fn abp(samples: Vec<f64>) -> SignalSegment {
        SignalSegment::new(samples, FS, Channel::Abp, Units::MmHg).unwrap()
    }

    #[test]
    fn oscillation_between_known_levels() {
        // 1.25 Hz has a period of exactly 100 samples, so both extremes are sampled.
        let x = (0..1024)
            .map(|i| 100.0 + 20.0 * (2.0 * PI * 1.25 * i as f64 / FS).sin())
            .collect();
        let l = extract_label(&abp(x), &PeakConfig::default()).unwrap();
        assert!((l.sbp - 120.0).abs() < 0.5);
        assert!((l.dbp - 80.0).abs() < 0.5);
        assert!((l.map - 93.33).abs() < 0.5);
    }

    #[test]
    fn map_formula() {
        let l = SegmentLabel::new(120.0, 60.0, "s").unwrap();
        assert_eq!(l.map, 80.0);
    }

    #[test]
    fn flat_is_unlabelable() {
        let err = extract_label(&abp(vec![90.0; 1024]), &PeakConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Unlabelable(_)));
    }

    #[test]
    fn requires_mmhg() {
        let s = SignalSegment::new(vec![1.0; 10], FS, Channel::Abp, Units::Volts).unwrap();
        assert!(extract_label(&s, &PeakConfig::default()).is_err());
    }
}
