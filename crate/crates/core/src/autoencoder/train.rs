use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainSpec;
use super::model::UNetModel;
use crate::dataset::SegmentStore;
use crate::error::{invalid, Error, Result};
use crate::optim::Adam;
use crate::signal::{Channel, GlobalMinMax};

/// Network inputs `[n][C][L]` and reconstruction targets `[n][L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainData {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub n: usize,
    pub channels: usize,
    pub segment_length: usize,
}

impl TrainData {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>, channels: usize, segment_length: usize) -> Result<Self> {
        if channels == 0 || segment_length == 0 {
            return Err(invalid("channels and segment length must be positive"));
        }
        let n = targets.len() / segment_length;
        if targets.len() != n * segment_length || inputs.len() != n * channels * segment_length {
            return Err(Error::Shape(format!(
                "{} inputs and {} targets do not form segments of {channels} x {segment_length}",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Self {
            inputs,
            targets,
            n,
            channels,
            segment_length,
        })
    }

    /// Collects `inputs` from the store and uses `target` as the
    /// reconstruction target, mapped through `scale` when given.
    pub fn from_store(
        store: &SegmentStore,
        inputs: &[Channel],
        target: Channel,
        scale: Option<&GlobalMinMax>,
    ) -> Result<Self> {
        let idx = |c: Channel| {
            store
                .channel_index(c)
                .ok_or_else(|| Error::Compatibility(format!("store has no {} channel", c.name())))
        };
        let input_idx = inputs.iter().map(|&c| idx(c)).collect::<Result<Vec<_>>>()?;
        let target_idx = idx(target)?;
        let l = store.segment_length();
        let mut x = Vec::with_capacity(store.len() * inputs.len() * l);
        let mut y = Vec::with_capacity(store.len() * l);
        for i in 0..store.len() {
            for &c in &input_idx {
                x.extend(store.samples(i, c).iter().map(|&v| v as f64));
            }
            y.extend(store.samples(i, target_idx).iter().map(|&v| match scale {
                Some(s) => s.apply(v as f64),
                None => v as f64,
            }));
        }
        Self::new(x, y, inputs.len(), l)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn gather(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let per = self.channels * self.segment_length;
        let l = self.segment_length;
        let mut x = Vec::with_capacity(idx.len() * per);
        let mut y = Vec::with_capacity(idx.len() * l);
        for &i in idx {
            x.extend_from_slice(&self.inputs[i * per..(i + 1) * per]);
            y.extend_from_slice(&self.targets[i * l..(i + 1) * l]);
        }
        (x, y)
    }
}

/// Tracks the best validation metric and the epochs since it improved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best: f64,
    pub best_epoch: usize,
    pub since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Records the metric for `epoch`; returns whether it is a new best.
    /// Only strict decreases count as improvement.
    pub fn observe(&mut self, epoch: usize, metric: f64) -> bool {
        if metric < self.best {
            self.best = metric;
            self.best_epoch = epoch;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.since_best >= self.patience
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mae: f64,
    /// Validation MAE mapped back to mmHg when the targets were scaled ABP.
    pub val_mae_mmhg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl History {
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "epoch,train_mse,val_mae")?;
        for e in &self.epochs {
            writeln!(w, "{},{},{}", e.epoch, e.train_mse, e.val_mae)?;
        }
        Ok(())
    }
}

/// Mean absolute reconstruction error over a data set.
pub fn reconstruction_mae(model: &UNetModel, data: &TrainData) -> Result<f64> {
    let mut total = 0.0;
    let chunk = 64;
    let per = data.channels * data.segment_length;
    for start in (0..data.n).step_by(chunk) {
        let end = (start + chunk).min(data.n);
        let (recon, _) = model.forward(&data.inputs[start * per..end * per])?;
        let tgt = &data.targets[start * data.segment_length..end * data.segment_length];
        total += recon.iter().zip(tgt).map(|(r, t)| (r - t).abs()).sum::<f64>();
    }
    Ok(total / data.targets.len() as f64)
}

/// Mini-batch Adam on the reconstruction MSE with early stopping on the
/// validation MAE. Returns the parameters of the best validation epoch,
/// rounded to 32-bit precision.
pub fn train(
    mut model: UNetModel,
    train: &TrainData,
    val: &TrainData,
    spec: &TrainSpec,
) -> Result<(UNetModel, History)> {
    spec.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(invalid("training and validation sets must be non-empty"));
    }
    let cfg = *model.config();
    for d in [train, val] {
        if d.channels != cfg.in_channels || d.segment_length != cfg.segment_length {
            return Err(Error::Shape(format!(
                "data is {} x {}, model expects {} x {}",
                d.channels, d.segment_length, cfg.in_channels, cfg.segment_length
            )));
        }
    }
    let mut adam = match model.optimizer.take() {
        Some(a) if a.m.len() == model.params().len() => a,
        _ => Adam::new(model.params().len(), spec.adam),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..train.n).collect();
    let mut stopper = EarlyStopping::new(spec.patience);
    let mut best_params = model.params().to_vec();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    for epoch in 1..=spec.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(spec.batch_size) {
            let (x, y) = train.gather(batch);
            let (loss, grad) = model.loss_and_grad(&x, &y, spec.threads)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("training loss diverged at epoch {epoch}")));
            }
            loss_sum += loss * batch.len() as f64;
            adam.step(model.params_mut(), &grad, spec.learning_rate);
        }
        let train_mse = loss_sum / train.n as f64;
        let val_mae = reconstruction_mae(&model, val)?;
        let record = EpochRecord {
            epoch,
            train_mse,
            val_mae,
            val_mae_mmhg: model.target_scale.map(|s| val_mae * (s.gmax - s.gmin)),
        };
        log::info!("epoch {epoch}: train_mse {train_mse:.6e} val_mae {val_mae:.6e}");
        epochs.push(record);
        if stopper.observe(epoch, val_mae) {
            best_params.copy_from_slice(model.params());
        }
        if stopper.should_stop() {
            stopped_early = epoch < spec.max_epochs;
            break;
        }
    }
    model.params_mut().copy_from_slice(&best_params);
    model.round_to_f32();
    model.optimizer = Some(adam);
    Ok((
        model,
        History {
            epochs,
            best_epoch: stopper.best_epoch,
            stopped_early,
        },
    ))
}
