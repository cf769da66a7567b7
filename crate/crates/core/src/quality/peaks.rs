use serde::{Deserialize, Serialize};

use crate::signal::min_max;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeakConfig {
    /// Minimum spacing between retained peaks.
    pub min_distance_samples: usize,
    /// Minimum prominence as a fraction of the segment's range.
    pub min_prominence: f64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        // 40 samples at 125 Hz caps the rate near 187 bpm.
        Self {
            min_distance_samples: 40,
            min_prominence: 0.3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub indices: Vec<usize>,
    pub prominences: Vec<f64>,
    pub intervals: Vec<usize>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Local maxima filtered by prominence, then thinned to `min_distance` by
/// keeping the tallest first. Plateaus report their leftmost sample and
/// equal heights resolve leftmost-first.
pub fn detect_peaks(x: &[f64], cfg: &PeakConfig) -> PeakSet {
    if x.len() < 3 {
        return PeakSet::default();
    }
    let (lo, hi) = min_max(x);
    let threshold = cfg.min_prominence * (hi - lo);

    let mut candidates: Vec<(usize, f64)> = local_maxima(x)
        .into_iter()
        .map(|p| (p, prominence(x, p)))
        .filter(|&(_, prom)| prom > 0.0 && prom >= threshold)
        .collect();

    if cfg.min_distance_samples > 1 && candidates.len() > 1 {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| {
            x[candidates[b].0]
                .total_cmp(&x[candidates[a].0])
                .then(candidates[a].0.cmp(&candidates[b].0))
        });
        let mut keep = vec![true; candidates.len()];
        for &i in &order {
            if !keep[i] {
                continue;
            }
            let pi = candidates[i].0;
            for (j, k) in keep.iter_mut().enumerate() {
                if j != i && *k && candidates[j].0.abs_diff(pi) < cfg.min_distance_samples {
                    *k = false;
                }
            }
        }
        let mut it = keep.iter();
        candidates.retain(|_| *it.next().unwrap());
    }

    let indices: Vec<usize> = candidates.iter().map(|c| c.0).collect();
    let intervals = indices.windows(2).map(|w| w[1] - w[0]).collect();
    PeakSet {
        prominences: candidates.iter().map(|c| c.1).collect(),
        indices,
        intervals,
    }
}

/// Peaks of the negated signal.
pub fn detect_troughs(x: &[f64], cfg: &PeakConfig) -> PeakSet {
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    detect_peaks(&neg, cfg)
}

fn local_maxima(x: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i < n - 1 {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead < n - 1 && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                out.push(i);
                i = ahead;
                continue;
            }
            i = ahead;
            continue;
        }
        i += 1;
    }
    out
}

/// Height above the higher of the two bases reached before a taller sample.
fn prominence(x: &[f64], p: usize) -> f64 {
    let h = x[p];
    let mut left_min = h;
    for &v in x[..p].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &x[p + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}
