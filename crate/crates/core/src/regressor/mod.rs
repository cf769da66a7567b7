//! Second-stage regressors from bottleneck features to SBP or DBP: an MLP
//! plus k-nearest-neighbour and SGD linear baselines. One model per target.

mod io;
mod knn;
mod linear;
mod mlp;
mod standardize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoder::FeatureMatrix;
use crate::error::{invalid, Error, Result};
pub use crate::quality::BpTarget;

pub use io::{
    read_regressor, regressor_from_bytes, regressor_to_bytes, write_regressor, REGRESSOR_MAGIC, REGRESSOR_VERSION,
};
pub use knn::KnnSpec;
pub use linear::SgdSpec;
pub use mlp::{Mlp, MlpSpec};
pub use standardize::Standardizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressorKind {
    Mlp,
    Knn,
    SgdLinear,
}

impl RegressorKind {
    fn code(self) -> u8 {
        match self {
            RegressorKind::Mlp => 0,
            RegressorKind::Knn => 1,
            RegressorKind::SgdLinear => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(RegressorKind::Mlp),
            1 => Some(RegressorKind::Knn),
            2 => Some(RegressorKind::SgdLinear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    pub mlp: MlpSpec,
    pub knn: KnnSpec,
    pub sgd: SgdSpec,
}

impl Default for RegressorSpec {
    fn default() -> Self {
        Self {
            kind: RegressorKind::Mlp,
            mlp: MlpSpec::default(),
            knn: KnnSpec::default(),
            sgd: SgdSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegressorParams {
    Mlp(Mlp),
    /// Standardized training rows sorted by id, with their targets.
    Knn {
        k: usize,
        x: Vec<f64>,
        y: Vec<f64>,
    },
    /// Weights over standardized features, predicting a standardized target.
    Linear {
        w: Vec<f64>,
        b: f64,
        y_mean: f64,
        y_std: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorModel {
    pub kind: RegressorKind,
    pub target: BpTarget,
    pub standardizer: Standardizer,
    pub params: RegressorParams,
}

/// Training rows reordered by segment id so that fitting does not depend on
/// the order rows were supplied in.
fn sorted_by_id(features: &FeatureMatrix, targets: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by_key(|&i| (features.ids[i], i));
    let mut x = Vec::with_capacity(features.data.len());
    let mut y = Vec::with_capacity(targets.len());
    for i in order {
        x.extend_from_slice(features.row(i));
        y.push(targets[i]);
    }
    (x, y)
}

/// Mean and population standard deviation, the latter clamped to 1 when zero.
pub(crate) fn target_scale(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    (mean, if std > 0.0 { std } else { 1.0 })
}

/// Fits one regressor for `target`. `targets[i]` belongs to feature row `i`.
pub fn fit(
    features: &FeatureMatrix,
    targets: &[f64],
    target: BpTarget,
    spec: &RegressorSpec,
) -> Result<RegressorModel> {
    let n = features.len();
    if targets.len() != n {
        return Err(Error::Shape(format!("{n} feature rows but {} targets", targets.len())));
    }
    if n < 2 {
        return Err(invalid("at least two training rows are required"));
    }
    if features.data.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(invalid("features and targets must be finite"));
    }
    let f = features.n_features;
    let (raw, y) = sorted_by_id(features, targets);
    let standardizer = Standardizer::fit(&raw, f);
    let x = standardizer.apply_rows(&raw);
    let params = match spec.kind {
        RegressorKind::Mlp => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.mlp.seed);
            RegressorParams::Mlp(Mlp::fit(&x, &y, f, &spec.mlp, &mut rng)?)
        }
        RegressorKind::Knn => {
            if spec.knn.k == 0 {
                return Err(invalid("k must be positive"));
            }
            RegressorParams::Knn {
                k: spec.knn.k,
                x: x.iter().map(|&v| v as f32 as f64).collect(),
                y,
            }
        }
        RegressorKind::SgdLinear => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.sgd.seed);
            let (w, b, y_mean, y_std) = linear::fit(&x, &y, f, &spec.sgd, &mut rng)?;
            RegressorParams::Linear { w, b, y_mean, y_std }
        }
    };
    Ok(RegressorModel {
        kind: spec.kind,
        target,
        standardizer,
        params,
    })
}

impl RegressorModel {
    pub fn n_features(&self) -> usize {
        self.standardizer.mean.len()
    }

    /// Predictions in mmHg, one per feature row.
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>> {
        if features.n_features != self.n_features() {
            return Err(Error::Compatibility(format!(
                "regressor expects {} features, got {}",
                self.n_features(),
                features.n_features
            )));
        }
        let mut z = vec![0.0; self.n_features()];
        Ok((0..features.len())
            .map(|i| {
                self.standardizer.apply_into(features.row(i), &mut z);
                self.predict_standardized(&z)
            })
            .collect())
    }

    fn predict_standardized(&self, z: &[f64]) -> f64 {
        match &self.params {
            RegressorParams::Mlp(m) => m.predict_one(z),
            RegressorParams::Knn { k, x, y } => knn::predict_one(*k, x, y, z),
            RegressorParams::Linear { w, b, y_mean, y_std } => {
                let s: f64 = w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + b;
                y_mean + y_std * s
            }
        }
    }
}
