//! Waveform types and the deterministic preprocessing chain.

mod baseline;
mod derivative;
mod filter;
mod normalize;
mod resample;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use baseline::{correct_baseline, moving_min, polyfit, polyfit_eval, BaselineConfig, Polynomial};
pub use derivative::{context_margin, derivative_chain, derivative_chain_len, Derivatives};
pub use filter::{design_bandpass, design_lowpass, FilterSpec};
pub use normalize::{denormalize_abp_volts, global_minmax, range_normalize, GlobalMinMax, MMHG_PER_VOLT};
pub use resample::{decimate, resample_to_125};

/// Default analysis segment length in samples.
pub const SEGMENT_LEN: usize = 1024;
/// Default working sampling rate in Hz.
pub const FS: f64 = 125.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Ppg,
    Vpg,
    Apg,
    Ecg,
    Abp,
}

impl Channel {
    pub const ALL: [Channel; 5] = [Channel::Ppg, Channel::Vpg, Channel::Apg, Channel::Ecg, Channel::Abp];

    /// On-disk code used by the segment store.
    pub fn code(self) -> u8 {
        match self {
            Channel::Ppg => 0,
            Channel::Vpg => 1,
            Channel::Apg => 2,
            Channel::Ecg => 3,
            Channel::Abp => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Channel> {
        Channel::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Ppg => "ppg",
            Channel::Vpg => "vpg",
            Channel::Apg => "apg",
            Channel::Ecg => "ecg",
            Channel::Abp => "abp",
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Normalized,
    MmHg,
    Volts,
}

/// A single-channel waveform window.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSegment {
    samples: Vec<f64>,
    fs: f64,
    channel: Channel,
    units: Units,
}

impl SignalSegment {
    pub fn new(samples: Vec<f64>, fs: f64, channel: Channel, units: Units) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("segment must contain at least one sample"));
        }
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(invalid(format!("sampling rate must be positive, got {fs}")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            fs,
            channel,
            units,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn units(&self) -> Units {
        self.units
    }

    /// Same metadata, new samples. Used by operations that preserve length.
    pub(crate) fn with_samples(&self, samples: Vec<f64>, units: Units) -> Self {
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Self {
            samples,
            fs: self.fs,
            channel: self.channel,
            units,
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.samples)
    }
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

/// Sample Pearson correlation; `None` when either input is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
