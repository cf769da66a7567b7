//! Bottleneck feature extraction and the `BPFT` feature file.

use std::path::Path;

use super::model::UNetModel;
use crate::dataset::{write_bytes, Cursor, SegmentStore};
use crate::error::{Error, FormatError, Result};

pub const FEATURE_MAGIC: [u8; 4] = *b"BPFT";
pub const FEATURE_VERSION: u32 = 1;

/// Row-major `n x n_features` matrix keyed by segment id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<u64>,
    pub n_features: usize,
    pub data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(ids: Vec<u64>, n_features: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != ids.len() * n_features {
            return Err(Error::Shape(format!(
                "{} values for {} rows of {n_features}",
                data.len(),
                ids.len()
            )));
        }
        Ok(Self { ids, n_features, data })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Rows for the given ids, in that order.
    pub fn select_ids(&self, ids: &[u64]) -> Result<FeatureMatrix> {
        let pos: std::collections::HashMap<u64, usize> = self.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut data = Vec::with_capacity(ids.len() * self.n_features);
        for id in ids {
            let &i = pos
                .get(id)
                .ok_or_else(|| Error::InvalidArgument(format!("no features for segment {id}")))?;
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix::new(ids.to_vec(), self.n_features, data)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 8 * (self.ids.len() + self.data.len()));
        out.extend_from_slice(&FEATURE_MAGIC);
        out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_features as u64).to_le_bytes());
        for id in &self.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        cur.header(FEATURE_MAGIC, FEATURE_VERSION)?;
        let n = cur.u64()? as usize;
        let f = cur.u64()? as usize;
        let expected = n
            .checked_mul(f)
            .and_then(|nf| nf.checked_add(n))
            .and_then(|v| v.checked_mul(8))
            .and_then(|v| v.checked_add(24))
            .ok_or_else(|| FormatError::Invalid("feature matrix size overflows".into()))?;
        if bytes.len() < expected {
            return Err(FormatError::Truncated {
                expected: expected as u64,
                found: bytes.len() as u64,
            }
            .into());
        }
        let ids = (0..n).map(|_| cur.u64()).collect::<Result<Vec<_>, _>>()?;
        let data = (0..n * f).map(|_| cur.f64()).collect::<Result<Vec<_>, _>>()?;
        cur.finish()?;
        FeatureMatrix::new(ids, f, data)
    }
}

pub fn write_features(m: &FeatureMatrix, path: &Path) -> Result<()> {
    write_bytes(path, &m.to_bytes())
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::from_bytes(&std::fs::read(path)?)
}

/// Features of every segment in the store, one row per segment in store
/// order. The store must hold the model's input channels.
pub fn extract_features(model: &UNetModel, store: &SegmentStore) -> Result<FeatureMatrix> {
    let cfg = model.config();
    if store.segment_length() != cfg.segment_length {
        return Err(Error::Compatibility(format!(
            "store segments have {} samples, model expects {}",
            store.segment_length(),
            cfg.segment_length
        )));
    }
    let idx = model
        .input_channels()
        .iter()
        .map(|&c| {
            store
                .channel_index(c)
                .ok_or_else(|| Error::Compatibility(format!("store has no {} channel", c.name())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(store.len() * cfg.n_features);
    let chunk = 32;
    for start in (0..store.len()).step_by(chunk) {
        let end = (start + chunk).min(store.len());
        let mut x = Vec::with_capacity((end - start) * idx.len() * cfg.segment_length);
        for i in start..end {
            for &c in &idx {
                x.extend(store.samples(i, c).iter().map(|&v| v as f64));
            }
        }
        data.extend(model.encode(&x)?);
    }
    FeatureMatrix::new(store.ids().to_vec(), cfg.n_features, data)
}
