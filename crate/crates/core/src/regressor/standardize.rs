use crate::autoencoder::FeatureMatrix;

/// Per-feature mean and population standard deviation from the training
/// set. Zero-variance columns get a standard deviation of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// `x` is row-major with `f` columns.
    pub fn fit(x: &[f64], f: usize) -> Self {
        let n = (x.len() / f.max(1)) as f64;
        let mut mean = vec![0.0; f];
        for row in x.chunks_exact(f) {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; f];
        for row in x.chunks_exact(f) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply_into(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.std) {
            *o = (v - m) / s;
        }
    }

    pub fn apply_rows(&self, x: &[f64]) -> Vec<f64> {
        let f = self.mean.len();
        let mut out = vec![0.0; x.len()];
        for (row, o) in x.chunks_exact(f).zip(out.chunks_exact_mut(f)) {
            self.apply_into(row, o);
        }
        out
    }

    pub fn apply(&self, m: &FeatureMatrix) -> FeatureMatrix {
        FeatureMatrix {
            ids: m.ids.clone(),
            n_features: m.n_features,
            data: self.apply_rows(&m.data),
        }
    }
}
