use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnSpec {
    pub k: usize,
}

impl Default for KnnSpec {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// Mean target of the `k` nearest training rows (Euclidean distance).
/// Equal distances go to the earlier row.
pub(crate) fn predict_one(k: usize, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let f = z.len();
    let mut d: Vec<(f64, usize)> = x
        .chunks_exact(f)
        .enumerate()
        .map(|(i, row)| (row.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    let k = k.min(d.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, cmp);
    }
    let mut nearest: Vec<_> = d[..k].to_vec();
    nearest.sort_by(cmp);
    nearest.iter().map(|&(_, i)| y[i]).sum::<f64>() / k as f64
}
