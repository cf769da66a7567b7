//! Shallow 1D U-Net autoencoder with a dense bottleneck.
//!
//! The encoder/decoder follows the usual U-Net layout (two same-padded
//! convolutions per level, max-pooling down, up-sampling plus skip
//! concatenation on the way back). At the deepest level the feature map is
//! flattened and passed through a dense compress/expand pair whose compress
//! outputs are the features handed to the regressors.

mod config;
mod features;
mod io;
mod model;
mod network;
mod train;

pub use config::{CompressActivation, Target, TrainSpec, UNetConfig, Upsampling};
pub use features::{extract_features, read_features, write_features, FeatureMatrix, FEATURE_MAGIC, FEATURE_VERSION};
pub use io::{model_from_bytes, model_to_bytes, read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use model::{default_channels, param_count, ParamCount, UNetModel};
pub use network::TensorInfo;
pub use train::{reconstruction_mae, train, EarlyStopping, EpochRecord, History, TrainData};
