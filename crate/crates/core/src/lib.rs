//! Two-stage cuffless blood pressure estimation.
//!
//! PPG/ECG/ABP waveform segments are preprocessed ([`signal`]), screened and
//! labelled ([`quality`]), stored and split ([`dataset`]). A shallow 1D U-Net
//! autoencoder with a dense bottleneck ([`autoencoder`]) learns to map the
//! input channels to ABP; its bottleneck activations feed per-target
//! regressors ([`regressor`]) whose predictions are scored against the BHS
//! and AAMI protocols ([`evaluation`]). [`pipeline`] wires the stages together.

pub mod autoencoder;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod optim;
pub mod pipeline;
pub mod quality;
pub mod regressor;
pub mod signal;

pub use error::{Error, Result};
