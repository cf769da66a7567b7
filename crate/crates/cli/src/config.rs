//! Pipeline configuration: one TOML document with a section per stage.

use std::path::Path;

use serde::{Deserialize, Serialize};

use bpae_core::autoencoder::{TrainSpec, UNetConfig};
use bpae_core::dataset::{IngestOptions, SplitFractions, SynthConfig};
use bpae_core::pipeline::{ExperimentConfig, PreprocessConfig};
use bpae_core::regressor::RegressorSpec;
use bpae_core::signal::Channel;

use crate::error::CliError;

/// Environment variable naming the config used when `--config` is absent.
pub const CONFIG_ENV: &str = "BPAE_CONFIG";

/// Contents of the shipped `default.cfg`.
pub const DEFAULT_CFG: &str = include_str!("../default.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSettings {
    pub input_fs: f64,
    pub abp_in_volts: bool,
    pub margin: usize,
    /// `channel = "column header"` pairs for CSV input.
    pub columns: Vec<(Channel, String)>,
}

impl Default for IngestSettings {
    fn default() -> Self {
        let o = IngestOptions::default();
        Self {
            input_fs: o.input_fs,
            abp_in_volts: o.abp_in_volts,
            margin: o.margin,
            columns: vec![
                (Channel::Ppg, "PLETH".into()),
                (Channel::Abp, "ABP".into()),
                (Channel::Ecg, "II".into()),
            ],
        }
    }
}

impl IngestSettings {
    pub fn options(&self) -> IngestOptions {
        IngestOptions {
            input_fs: self.input_fs,
            abp_in_volts: self.abp_in_volts,
            margin: self.margin,
            ..IngestOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub channels: Vec<Channel>,
    pub split_seed: u64,
    pub folds: usize,
    pub histogram_bin_width: f64,
    pub split: SplitFractions,
    pub unet: UNetConfig,
    pub train: TrainSpec,
    pub regressor: RegressorSpec,
    pub preprocess: PreprocessConfig,
    pub ingest: IngestSettings,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            channels: e.channels,
            split_seed: e.split_seed,
            folds: e.folds,
            histogram_bin_width: e.histogram_bin_width,
            split: e.split,
            unet: e.unet,
            train: e.train,
            regressor: e.regressor,
            preprocess: PreprocessConfig::default(),
            ingest: IngestSettings::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            channels: self.channels.clone(),
            unet: self.unet,
            train: self.train,
            regressor: self.regressor,
            split: self.split,
            split_seed: self.split_seed,
            folds: self.folds,
            histogram_bin_width: self.histogram_bin_width,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.experiment().validate()?;
        Ok(())
    }

    /// One seed drives the network, the splits and the regressors.
    pub fn set_seed(&mut self, seed: u64) {
        self.train.seed = seed;
        self.split_seed = seed;
        self.regressor.mlp.seed = seed;
        self.regressor.sgd.seed = seed;
    }

    /// Sets a dotted key such as `unet.width` from its textual value. Only
    /// keys present in the schema are accepted.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        let mut doc = toml::Value::try_from(&*self).expect("config serializes");
        let parts: Vec<&str> = key.split('.').collect();
        let mut slot = &mut doc;
        for p in &parts {
            slot = slot
                .get_mut(*p)
                .ok_or_else(|| CliError::Usage(format!("unknown config key '{key}'")))?;
        }
        *slot = parse_like(slot, raw).ok_or_else(|| CliError::Usage(format!("bad value '{raw}' for '{key}'")))?;
        *self = doc
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("{key}={raw}: {e}")))?;
        Ok(())
    }
}

fn parse_like(old: &toml::Value, raw: &str) -> Option<toml::Value> {
    use toml::Value;
    Some(match old {
        Value::Integer(_) => Value::Integer(raw.parse().ok()?),
        Value::Float(_) => Value::Float(raw.parse().ok()?),
        Value::Boolean(_) => Value::Boolean(raw.parse().ok()?),
        Value::String(_) => Value::String(raw.to_string()),
        // Channel lists are written with '+' since ',' separates grid values.
        Value::Array(_) => Value::Array(raw.split('+').map(|s| Value::String(s.trim().to_string())).collect()),
        _ => return None,
    })
}

/// `key=v1,v2,...` grid axes expanded into their cartesian product, in
/// row-major order of the axes as given.
pub fn expand_grid(axes: &[String]) -> Result<Vec<Vec<(String, String)>>, CliError> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        let (key, vals) = axis
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("grid axis '{axis}' must look like key=v1,v2")))?;
        let vals: Vec<&str> = vals.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
        if vals.is_empty() {
            return Err(CliError::Usage(format!("grid axis '{key}' has no values")));
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                vals.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.trim().to_string(), v.to_string()));
                    c
                })
            })
            .collect();
    }
    Ok(combos)
}
