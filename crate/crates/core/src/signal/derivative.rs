use super::filter::filter_valid;
use super::normalize::range_normalize_slice;
use super::{FilterSpec, SignalSegment, Units, SEGMENT_LEN};
use crate::error::{Error, Result};

/// First (VPG) and second (APG) derivatives of a PPG segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub vpg: SignalSegment,
    pub apg: SignalSegment,
    /// The input had no context margin and its edges were reflected.
    pub edge_filled: bool,
}

/// Extra raw samples needed on each side of a segment so both derivative
/// stages have full filter support.
pub fn context_margin(filt: &FilterSpec) -> usize {
    2 * (1 + filt.group_delay_samples)
}

/// VPG/APG of the central [`SEGMENT_LEN`] samples of `ppg`.
///
/// `ppg` is either exactly `SEGMENT_LEN` long (edges reflected, flagged) or
/// carries at least [`context_margin`] samples on both sides.
pub fn derivative_chain(ppg: &SignalSegment, filt: &FilterSpec) -> Result<Derivatives> {
    derivative_chain_len(ppg, filt, SEGMENT_LEN)
}

pub fn derivative_chain_len(ppg: &SignalSegment, filt: &FilterSpec, out_len: usize) -> Result<Derivatives> {
    let gd = filt.group_delay_samples;
    let margin = context_margin(filt);
    let n = ppg.len();
    let (x, start, edge_filled) = if n == out_len && n > margin {
        (reflect_pad(ppg.samples(), margin), margin, true)
    } else if n >= out_len + 2 * margin {
        (ppg.samples().to_vec(), (n - out_len) / 2, false)
    } else {
        return Err(Error::Length {
            needed: out_len + 2 * margin,
            got: n,
        });
    };

    // d[i] = x[i+1] - x[i] sits at i + 1/2.
    let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // f1[j] is the filtered first difference centered on d[j + gd].
    let f1 = filter_valid(&filt.taps, &d);
    // e[j] = f1[j+1] - f1[j] sits at original index j + gd + 1.
    let e: Vec<f64> = f1.windows(2).map(|w| w[1] - w[0]).collect();
    // f2[q] centered on e[q + gd], i.e. original index q + 2gd + 1.
    let f2 = filter_valid(&filt.taps, &e);

    let vpg: Vec<f64> = (start..start + out_len).map(|c| f1[c - gd]).collect();
    let apg: Vec<f64> = (start..start + out_len).map(|c| f2[c - 2 * gd - 1]).collect();

    let make = |s: Vec<f64>, ch| SignalSegment::new(s, ppg.fs(), ch, Units::Normalized);
    Ok(Derivatives {
        vpg: make(range_normalize_slice(&vpg)?, super::Channel::Vpg)?,
        apg: make(range_normalize_slice(&apg)?, super::Channel::Apg)?,
        edge_filled,
    })
}

/// Mirror padding without repeating the edge sample.
pub(crate) fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    debug_assert!(n > pad);
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| x[i]));
    out.extend_from_slice(x);
    out.extend((1..=pad).map(|i| x[n - 1 - i]));
    out
}
