//! Regressor file: magic `BPRG`, version, kind and target tags, feature
//! count, standardization vectors (f64), scalar block (f64), then named
//! parameter blocks with shape prefixes. Blocks are f32 except the kNN
//! targets, which are kept at full precision.

use std::path::Path;

use super::mlp::Mlp;
use super::standardize::Standardizer;
use super::{BpTarget, RegressorKind, RegressorModel, RegressorParams};
use crate::dataset::{write_bytes, Cursor};
use crate::error::{FormatError, Result};

pub const REGRESSOR_MAGIC: [u8; 4] = *b"BPRG";
pub const REGRESSOR_VERSION: u32 = 1;

const F32: u8 = 0;
const F64: u8 = 1;

struct Block<'a> {
    name: &'a str,
    shape: Vec<usize>,
    dtype: u8,
    data: &'a [f64],
}

fn put_block(out: &mut Vec<u8>, b: &Block) {
    out.extend_from_slice(&(b.name.len() as u16).to_le_bytes());
    out.extend_from_slice(b.name.as_bytes());
    out.push(b.dtype);
    out.push(b.shape.len() as u8);
    for &d in &b.shape {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in b.data {
        if b.dtype == F32 {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        } else {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

fn get_block(cur: &mut Cursor, name: &str, dtype: u8) -> Result<(Vec<usize>, Vec<f64>), FormatError> {
    let len = u16::from_le_bytes(cur.take(2)?.try_into().unwrap()) as usize;
    let found = String::from_utf8_lossy(cur.take(len)?).into_owned();
    if found != name {
        return Err(FormatError::Invalid(format!("expected block {name}, found {found}")));
    }
    if cur.u8()? != dtype {
        return Err(FormatError::Invalid(format!("block {name} has the wrong element type")));
    }
    let ndim = cur.u8()? as usize;
    let shape = (0..ndim)
        .map(|_| cur.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let n: usize = shape.iter().product();
    if n > cur.bytes.len() {
        return Err(FormatError::Invalid(format!("block {name} is implausibly large")));
    }
    let data = (0..n)
        .map(|_| {
            if dtype == F32 {
                cur.f32().map(f64::from)
            } else {
                cur.f64()
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(FormatError::Invalid(format!("non-finite value in block {name}")));
    }
    Ok((shape, data))
}

pub fn regressor_to_bytes(m: &RegressorModel) -> Vec<u8> {
    let f = m.n_features();
    let mut out = Vec::new();
    out.extend_from_slice(&REGRESSOR_MAGIC);
    out.extend_from_slice(&REGRESSOR_VERSION.to_le_bytes());
    out.push(m.kind.code());
    out.push(match m.target {
        BpTarget::Sbp => 0,
        BpTarget::Dbp => 1,
    });
    out.extend_from_slice(&(f as u64).to_le_bytes());
    for v in m.standardizer.mean.iter().chain(&m.standardizer.std) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let (scalars, blocks): (Vec<f64>, Vec<Block>) = match &m.params {
        RegressorParams::Mlp(p) => {
            let h = p.hidden;
            let (w1, b1, w2) = (h * f, h * f + h, h * f + 2 * h);
            (
                vec![p.y_mean, p.y_std],
                vec![
                    Block {
                        name: "hidden.weight",
                        shape: vec![h, f],
                        dtype: F32,
                        data: &p.params[..w1],
                    },
                    Block {
                        name: "hidden.bias",
                        shape: vec![h],
                        dtype: F32,
                        data: &p.params[w1..b1],
                    },
                    Block {
                        name: "out.weight",
                        shape: vec![1, h],
                        dtype: F32,
                        data: &p.params[b1..w2],
                    },
                    Block {
                        name: "out.bias",
                        shape: vec![1],
                        dtype: F32,
                        data: &p.params[w2..],
                    },
                ],
            )
        }
        RegressorParams::Knn { k, x, y } => (
            vec![*k as f64],
            vec![
                Block {
                    name: "train.features",
                    shape: vec![y.len(), f],
                    dtype: F32,
                    data: x,
                },
                Block {
                    name: "train.targets",
                    shape: vec![y.len()],
                    dtype: F64,
                    data: y,
                },
            ],
        ),
        RegressorParams::Linear { w, b, y_mean, y_std } => (
            vec![*y_mean, *y_std, *b],
            vec![Block {
                name: "weight",
                shape: vec![f],
                dtype: F32,
                data: w,
            }],
        ),
    };
    out.extend_from_slice(&(scalars.len() as u32).to_le_bytes());
    for s in &scalars {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    for b in &blocks {
        put_block(&mut out, b);
    }
    out
}

pub fn regressor_from_bytes(bytes: &[u8]) -> Result<RegressorModel> {
    let mut cur = Cursor::new(bytes);
    cur.header(REGRESSOR_MAGIC, REGRESSOR_VERSION)?;
    let kind_code = cur.u8()?;
    let kind = RegressorKind::from_code(kind_code)
        .ok_or_else(|| FormatError::Invalid(format!("unknown regressor kind {kind_code}")))?;
    let target = match cur.u8()? {
        0 => BpTarget::Sbp,
        1 => BpTarget::Dbp,
        t => return Err(FormatError::Invalid(format!("unknown target {t}")).into()),
    };
    let f = cur.u64()? as usize;
    if f == 0 || f.saturating_mul(16) > bytes.len() {
        return Err(FormatError::Invalid(format!("bad feature count {f}")).into());
    }
    let mean = (0..f).map(|_| cur.f64()).collect::<Result<Vec<_>, _>>()?;
    let std = (0..f).map(|_| cur.f64()).collect::<Result<Vec<_>, _>>()?;
    let n_scalars = cur.u32()? as usize;
    let expected_scalars = match kind {
        RegressorKind::Mlp => 2,
        RegressorKind::Knn => 1,
        RegressorKind::SgdLinear => 3,
    };
    if n_scalars != expected_scalars {
        return Err(FormatError::Invalid(format!("expected {expected_scalars} scalars, found {n_scalars}")).into());
    }
    let scalars = (0..n_scalars).map(|_| cur.f64()).collect::<Result<Vec<_>, _>>()?;
    let _n_blocks = cur.u32()?;
    let shape_err = |name: &str| FormatError::Invalid(format!("block {name} has an inconsistent shape"));
    let params = match kind {
        RegressorKind::Mlp => {
            let (s1, w1) = get_block(&mut cur, "hidden.weight", F32)?;
            if s1.len() != 2 || s1[1] != f {
                return Err(shape_err("hidden.weight").into());
            }
            let h = s1[0];
            let (_, b1) = get_block(&mut cur, "hidden.bias", F32)?;
            let (_, w2) = get_block(&mut cur, "out.weight", F32)?;
            let (_, b2) = get_block(&mut cur, "out.bias", F32)?;
            if b1.len() != h || w2.len() != h || b2.len() != 1 {
                return Err(shape_err("out").into());
            }
            RegressorParams::Mlp(Mlp {
                n_features: f,
                hidden: h,
                params: [w1, b1, w2, b2].concat(),
                y_mean: scalars[0],
                y_std: scalars[1],
            })
        }
        RegressorKind::Knn => {
            let (sx, x) = get_block(&mut cur, "train.features", F32)?;
            let (_, y) = get_block(&mut cur, "train.targets", F64)?;
            if sx.len() != 2 || sx[1] != f || sx[0] != y.len() || scalars[0] < 1.0 {
                return Err(shape_err("train").into());
            }
            RegressorParams::Knn {
                k: scalars[0] as usize,
                x,
                y,
            }
        }
        RegressorKind::SgdLinear => {
            let (_, w) = get_block(&mut cur, "weight", F32)?;
            if w.len() != f {
                return Err(shape_err("weight").into());
            }
            RegressorParams::Linear {
                w,
                b: scalars[2],
                y_mean: scalars[0],
                y_std: scalars[1],
            }
        }
    };
    cur.finish()?;
    Ok(RegressorModel {
        kind,
        target,
        standardizer: Standardizer { mean, std },
        params,
    })
}

pub fn write_regressor(m: &RegressorModel, path: &Path) -> Result<()> {
    write_bytes(path, &regressor_to_bytes(m))
}

pub fn read_regressor(path: &Path) -> Result<RegressorModel> {
    regressor_from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::FeatureMatrix;
    use crate::error::Error;
    use crate::regressor::{fit, MlpSpec, RegressorSpec};

    #[test]
    fn round_trips_every_kind() {
        let f = 3;
        let data: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let x = FeatureMatrix::new((0..20).collect(), f, data).unwrap();
        let y: Vec<f64> = (0..20).map(|i| 70.0 + (i * 3 % 7) as f64).collect();
        for kind in [RegressorKind::Mlp, RegressorKind::Knn, RegressorKind::SgdLinear] {
            let spec = RegressorSpec {
                kind,
                mlp: MlpSpec {
                    max_epochs: 20,
                    hidden: 4,
                    ..MlpSpec::default()
                },
                ..RegressorSpec::default()
            };
            let m = fit(&x, &y, BpTarget::Dbp, &spec).unwrap();
            let bytes = regressor_to_bytes(&m);
            assert_eq!(&bytes[..4], b"BPRG");
            let back = regressor_from_bytes(&bytes).unwrap();
            assert_eq!(back, m, "{kind:?}");
            let (a, b) = (m.predict(&x).unwrap(), back.predict(&x).unwrap());
            assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
            assert!(matches!(
                regressor_from_bytes(&bytes[..bytes.len() - 2]),
                Err(Error::Format(_))
            ));
        }
    }
}
