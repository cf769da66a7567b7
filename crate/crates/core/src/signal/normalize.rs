use serde::{Deserialize, Serialize};

use super::{min_max, SignalSegment, Units};
use crate::error::{invalid, Error, Result};

/// ABP scale of the source recordings, mmHg per volt.
pub const MMHG_PER_VOLT: f64 = 100.0;

/// Affine map of a segment onto `[0, 1]`.
pub fn range_normalize(seg: &SignalSegment) -> Result<SignalSegment> {
    let out = range_normalize_slice(seg.samples())?;
    Ok(seg.with_samples(out, Units::Normalized))
}

pub(crate) fn range_normalize_slice(x: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = min_max(x);
    if !(hi > lo) {
        return Err(Error::DegenerateSignal(format!("flat signal (min == max == {lo})")));
    }
    let span = hi - lo;
    Ok(x.iter().map(|&v| if v == hi { 1.0 } else { (v - lo) / span }).collect())
}

/// Dataset-wide min-max scaling of ABP, shared by every segment so relative
/// amplitudes survive normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalMinMax {
    pub gmin: f64,
    pub gmax: f64,
}

impl GlobalMinMax {
    pub fn new(gmin: f64, gmax: f64) -> Result<Self> {
        if !(gmin.is_finite() && gmax.is_finite() && gmax > gmin) {
            return Err(invalid(format!(
                "global range requires gmax > gmin, got [{gmin}, {gmax}]"
            )));
        }
        Ok(Self { gmin, gmax })
    }

    pub fn from_slices<'a>(segments: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut any = false;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in segments {
            any = true;
            let (a, b) = min_max(s);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        if !any {
            return Err(invalid("global min-max over an empty segment list"));
        }
        Self::new(lo, hi)
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.gmin) / (self.gmax - self.gmin)
    }

    pub fn invert(&self, v: f64) -> f64 {
        v * (self.gmax - self.gmin) + self.gmin
    }

    pub fn apply_segment(&self, seg: &SignalSegment) -> SignalSegment {
        seg.with_samples(
            seg.samples().iter().map(|&v| self.apply(v)).collect(),
            Units::Normalized,
        )
    }

    pub fn invert_segment(&self, seg: &SignalSegment) -> SignalSegment {
        seg.with_samples(seg.samples().iter().map(|&v| self.invert(v)).collect(), Units::MmHg)
    }
}

pub fn global_minmax(segments: &[SignalSegment]) -> Result<GlobalMinMax> {
    GlobalMinMax::from_slices(segments.iter().map(|s| s.samples()))
}

pub fn denormalize_abp_volts(seg: &SignalSegment) -> Result<SignalSegment> {
    if seg.units() != Units::Volts {
        return Err(invalid(format!(
            "expected ABP in volts, segment is tagged {:?}",
            seg.units()
        )));
    }
    Ok(seg.with_samples(seg.samples().iter().map(|v| v * MMHG_PER_VOLT).collect(), Units::MmHg))
}
