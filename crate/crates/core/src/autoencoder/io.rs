//! Model file: magic `BPUN`, version, configuration, input channel codes,
//! optional target scaling, then one block per tensor (name, shape, 32-bit
//! little-endian values). Parameters are held at 32-bit precision after
//! training, so a save/load round trip is exact.

use std::path::Path;

use super::config::{CompressActivation, Target, UNetConfig, Upsampling};
use super::model::UNetModel;
use crate::dataset::{write_bytes, Cursor};
use crate::error::{FormatError, Result};
use crate::signal::{Channel, GlobalMinMax};

pub const MODEL_MAGIC: [u8; 4] = *b"BPUN";
pub const MODEL_VERSION: u32 = 1;

pub fn model_to_bytes(model: &UNetModel) -> Vec<u8> {
    let cfg = model.config();
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    for v in [
        cfg.depth,
        cfg.width,
        cfg.kernel,
        cfg.in_channels,
        cfg.segment_length,
        cfg.n_features,
    ] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.push(match cfg.target {
        Target::Abp => 0,
        Target::Ppg => 1,
    });
    out.push(match cfg.upsampling {
        Upsampling::Transposed => 0,
        Upsampling::NearestConv => 1,
    });
    out.push(match cfg.compress_activation {
        CompressActivation::Linear => 0,
        CompressActivation::Relu => 1,
    });
    out.push(model.input_channels().len() as u8);
    out.extend(model.input_channels().iter().map(|c| c.code()));
    match model.target_scale {
        Some(s) => {
            out.push(1);
            out.extend_from_slice(&s.gmin.to_le_bytes());
            out.extend_from_slice(&s.gmax.to_le_bytes());
        }
        None => {
            out.push(0);
            out.extend_from_slice(&[0; 16]);
        }
    }
    let tensors: Vec<_> = model.tensors().collect();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.name.len() as u16).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.push(t.shape.len() as u8);
        for &d in &t.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &p in &model.params()[t.range()] {
            out.extend_from_slice(&(p as f32).to_le_bytes());
        }
    }
    out
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<UNetModel> {
    let mut cur = Cursor::new(bytes);
    cur.header(MODEL_MAGIC, MODEL_VERSION)?;
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = cur.u32()? as usize;
    }
    let target = match cur.u8()? {
        0 => Target::Abp,
        1 => Target::Ppg,
        t => return Err(FormatError::Invalid(format!("unknown target code {t}")).into()),
    };
    let upsampling = match cur.u8()? {
        0 => Upsampling::Transposed,
        1 => Upsampling::NearestConv,
        u => return Err(FormatError::Invalid(format!("unknown upsampling code {u}")).into()),
    };
    let compress_activation = match cur.u8()? {
        0 => CompressActivation::Linear,
        1 => CompressActivation::Relu,
        u => return Err(FormatError::Invalid(format!("unknown activation code {u}")).into()),
    };
    let cfg = UNetConfig {
        depth: dims[0],
        width: dims[1],
        kernel: dims[2],
        in_channels: dims[3],
        segment_length: dims[4],
        n_features: dims[5],
        target,
        upsampling,
        compress_activation,
    };
    cfg.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    let nc = cur.u8()? as usize;
    let channels = cur
        .take(nc)?
        .iter()
        .map(|&c| Channel::from_code(c).ok_or_else(|| FormatError::Invalid(format!("unknown channel code {c}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let has_scale = cur.u8()?;
    let (gmin, gmax) = (cur.f64()?, cur.f64()?);
    let scale = match has_scale {
        0 => None,
        1 => Some(GlobalMinMax::new(gmin, gmax).map_err(|e| FormatError::Invalid(e.to_string()))?),
        f => return Err(FormatError::Invalid(format!("bad scale flag {f}")).into()),
    };
    // The expected tensor sequence comes from the configuration.
    let template = UNetModel::from_parts(cfg, channels.clone(), None, vec![0.0; n_params(&cfg)])
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    let expected: Vec<_> = template.tensors().cloned().collect();
    let n_tensors = cur.u32()? as usize;
    if n_tensors != expected.len() {
        return Err(FormatError::Invalid(format!("expected {} tensors, found {n_tensors}", expected.len())).into());
    }
    let mut params = Vec::with_capacity(template.params().len());
    drop(template);
    for t in &expected {
        let name_len = u16::from_le_bytes(cur.take(2)?.try_into().unwrap()) as usize;
        let name = String::from_utf8_lossy(cur.take(name_len)?).into_owned();
        let ndim = cur.u8()? as usize;
        let shape = (0..ndim)
            .map(|_| cur.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>, _>>()?;
        if name != t.name || shape != t.shape {
            return Err(FormatError::Invalid(format!(
                "tensor {name} {shape:?} does not match expected {} {:?}",
                t.name, t.shape
            ))
            .into());
        }
        for _ in 0..t.len() {
            let v = cur.f32()?;
            if !v.is_finite() {
                return Err(FormatError::Invalid(format!("non-finite value in {name}")).into());
            }
            params.push(v as f64);
        }
    }
    cur.finish()?;
    UNetModel::from_parts(cfg, channels, scale, params)
}

fn n_params(cfg: &UNetConfig) -> usize {
    super::model::param_count(cfg).map(|c| c.total).unwrap_or(0)
}

pub fn write_model(model: &UNetModel, path: &Path) -> Result<()> {
    write_bytes(path, &model_to_bytes(model))
}

pub fn read_model(path: &Path) -> Result<UNetModel> {
    model_from_bytes(&std::fs::read(path)?)
}
