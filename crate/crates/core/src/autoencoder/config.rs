use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optim::AdamConfig;
use crate::signal::SEGMENT_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Abp,
    Ppg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Upsampling {
    /// Transposed convolution, kernel 2, stride 2.
    Transposed,
    /// Sample repetition followed by a same-padded convolution.
    NearestConv,
}

/// Activation of the dense compress layer, whose outputs are the features.
///
/// With ReLU every compress unit tends to die within the first epoch: the
/// skip connection carries the waveform shape, and Adam moves all of a
/// unit's non-negative inputs' weights together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressActivation {
    Linear,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UNetConfig {
    pub depth: usize,
    /// Filters at the first encoder level; doubles per level.
    pub width: usize,
    pub kernel: usize,
    pub in_channels: usize,
    pub segment_length: usize,
    pub n_features: usize,
    pub target: Target,
    pub upsampling: Upsampling,
    pub compress_activation: CompressActivation,
}

impl Default for UNetConfig {
    fn default() -> Self {
        Self {
            depth: 1,
            width: 128,
            kernel: 3,
            in_channels: 4,
            segment_length: SEGMENT_LEN,
            n_features: 1024,
            target: Target::Abp,
            upsampling: Upsampling::Transposed,
            compress_activation: CompressActivation::Linear,
        }
    }
}

impl UNetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.depth) {
            return Err(invalid(format!("depth must be in 1..=4, got {}", self.depth)));
        }
        if self.width == 0 || self.n_features == 0 {
            return Err(invalid("width and feature count must be positive"));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(invalid(format!("kernel must be odd, got {}", self.kernel)));
        }
        if !(1..=4).contains(&self.in_channels) {
            return Err(invalid(format!(
                "input channel count must be in 1..=4, got {}",
                self.in_channels
            )));
        }
        let stride = 1usize << self.depth;
        if self.segment_length == 0 || !self.segment_length.is_multiple_of(stride) {
            return Err(invalid(format!(
                "segment length {} is not divisible by 2^{}",
                self.segment_length, self.depth
            )));
        }
        Ok(())
    }

    /// Filters at encoder level `level`; `level == depth` is the bottleneck.
    pub fn level_width(&self, level: usize) -> usize {
        self.width << level
    }

    /// Length of the deepest feature map.
    pub fn bottom_length(&self) -> usize {
        self.segment_length >> self.depth
    }

    /// Size of the flattened map entering the dense bottleneck.
    pub fn flat_size(&self) -> usize {
        self.bottom_length() * self.level_width(self.depth - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSpec {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    pub learning_rate: f64,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Worker threads for gradient computation. Results are reproducible for
    /// a fixed thread count.
    pub threads: usize,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self {
            batch_size: 64,
            max_epochs: 100,
            patience: 15,
            learning_rate: 1e-3,
            adam: AdamConfig::default(),
            seed: 0,
            threads: 1,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(invalid("batch size must be positive"));
        }
        if self.patience > self.max_epochs {
            return Err(invalid(format!(
                "patience {} exceeds max epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning rate must be finite and non-negative"));
        }
        Ok(())
    }
}
