use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CompressActivation, UNetConfig};
use super::network::{
    maxpool2, maxpool2_backward, relu_backward, relu_inplace, repeat2, repeat2_backward, Kind, Layout, TensorInfo, Up,
};
use crate::error::{invalid, Error, Result};
use crate::optim::Adam;
use crate::signal::{Channel, GlobalMinMax};

/// Parameter totals by layer family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamCount {
    pub conv: usize,
    pub dense: usize,
    pub total: usize,
    /// Weights of the compress layer alone (excluding its bias).
    pub compress_weights: usize,
}

pub fn param_count(cfg: &UNetConfig) -> Result<ParamCount> {
    cfg.validate()?;
    let layout = Layout::new(cfg);
    let sum = |kind| {
        layout
            .tensors
            .iter()
            .filter(|(_, k, _)| *k == kind)
            .map(|(t, _, _)| t.len())
            .sum::<usize>()
    };
    let conv = sum(Kind::Conv);
    let dense = sum(Kind::Dense);
    Ok(ParamCount {
        conv,
        dense,
        total: conv + dense,
        compress_weights: layout.compress.nin * layout.compress.nout,
    })
}

/// Network configuration, input channel identities, trained parameters and
/// the ABP scaling used to build the training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct UNetModel {
    config: UNetConfig,
    input_channels: Vec<Channel>,
    pub target_scale: Option<GlobalMinMax>,
    params: Vec<f64>,
    layout: Layout,
    /// Adam moments left by the last training run; not persisted.
    pub(crate) optimizer: Option<Adam>,
}

/// Per-sample activations kept for the backward pass.
struct Trace {
    enc: Vec<EncTrace>,
    flat: Vec<f64>,
    z: Vec<f64>,
    e: Vec<f64>,
    bott_a: Vec<f64>,
    bott_b: Vec<f64>,
    dec: Vec<DecTrace>,
    out: Vec<f64>,
}

struct EncTrace {
    input: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    second: Vec<bool>,
}

struct DecTrace {
    /// Input to the up-sampling layer (after repetition for nearest mode).
    up_in: Vec<f64>,
    cat: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Channel set implied by a channel count.
pub fn default_channels(n: usize) -> Vec<Channel> {
    match n {
        1 => vec![Channel::Ppg],
        2 => vec![Channel::Ppg, Channel::Ecg],
        3 => vec![Channel::Ppg, Channel::Vpg, Channel::Apg],
        _ => vec![Channel::Ppg, Channel::Vpg, Channel::Apg, Channel::Ecg],
    }
}

impl UNetModel {
    /// He-uniform weights for the hidden layers, Glorot-uniform for the
    /// linear output layer, zero biases.
    pub fn init(config: UNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut params = vec![0.0; layout.n_params];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (info, _, fan_in) in &layout.tensors {
            if let Some(bound) = init_bound(info, *fan_in) {
                let dist = Uniform::new_inclusive(-bound, bound);
                for p in &mut params[info.range()] {
                    *p = dist.sample(&mut rng);
                }
            }
        }
        Ok(Self {
            input_channels: default_channels(config.in_channels),
            config,
            target_scale: None,
            params,
            layout,
            optimizer: None,
        })
    }

    pub(crate) fn from_parts(
        config: UNetConfig,
        input_channels: Vec<Channel>,
        target_scale: Option<GlobalMinMax>,
        params: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.n_params {
            return Err(invalid(format!(
                "expected {} parameters, got {}",
                layout.n_params,
                params.len()
            )));
        }
        let mut m = Self {
            config,
            input_channels: Vec::new(),
            target_scale,
            params,
            layout,
            optimizer: None,
        };
        m.set_input_channels(input_channels)?;
        Ok(m)
    }

    pub fn config(&self) -> &UNetConfig {
        &self.config
    }

    pub fn input_channels(&self) -> &[Channel] {
        &self.input_channels
    }

    pub fn set_input_channels(&mut self, channels: Vec<Channel>) -> Result<()> {
        if channels.len() != self.config.in_channels {
            return Err(invalid(format!(
                "model takes {} channels, got {:?}",
                self.config.in_channels, channels
            )));
        }
        self.input_channels = channels;
        Ok(())
    }

    pub fn optimizer(&self) -> Option<&Adam> {
        self.optimizer.as_ref()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn tensors(&self) -> impl Iterator<Item = &TensorInfo> {
        self.layout.tensors.iter().map(|(t, _, _)| t)
    }

    /// Initialization bound of a tensor, `None` for biases.
    pub fn init_bound(&self, name: &str) -> Option<f64> {
        self.layout
            .tensors
            .iter()
            .find(|(t, _, _)| t.name == name)
            .and_then(|(t, _, fan_in)| init_bound(t, *fan_in))
    }

    /// Rounds every parameter to the nearest 32-bit float, matching what the
    /// model file stores.
    pub fn round_to_f32(&mut self) {
        self.params.iter_mut().for_each(|p| *p = *p as f32 as f64);
    }

    fn sample_len(&self) -> usize {
        self.config.in_channels * self.config.segment_length
    }

    fn check_batch(&self, inputs: &[f64]) -> Result<usize> {
        let per = self.sample_len();
        if !inputs.len().is_multiple_of(per) {
            return Err(Error::Shape(format!(
                "batch of {} values is not a multiple of {} channels x {} samples",
                inputs.len(),
                self.config.in_channels,
                self.config.segment_length
            )));
        }
        Ok(inputs.len() / per)
    }

    /// Reconstructions (`B x L`) and bottleneck features (`B x F`) for a
    /// batch laid out as `[sample][channel][time]`.
    pub fn forward(&self, inputs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let b = self.check_batch(inputs)?;
        let per = self.sample_len();
        let mut recon = Vec::with_capacity(b * self.config.segment_length);
        let mut feats = Vec::with_capacity(b * self.config.n_features);
        for x in inputs.chunks_exact(per) {
            let t = self.trace(x);
            recon.extend_from_slice(&t.out);
            feats.extend_from_slice(&t.z);
        }
        Ok((recon, feats))
    }

    /// Bottleneck features only; skips the decoder.
    pub fn encode(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let b = self.check_batch(inputs)?;
        let mut feats = Vec::with_capacity(b * self.config.n_features);
        for x in inputs.chunks_exact(self.sample_len()) {
            let (_, flat) = self.encoder(x);
            let mut z = self.layout.compress.forward(&self.params, &flat);
            if self.config.compress_activation == CompressActivation::Relu {
                relu_inplace(&mut z);
            }
            feats.extend_from_slice(&z);
        }
        Ok(feats)
    }

    fn encoder(&self, x: &[f64]) -> (Vec<EncTrace>, Vec<f64>) {
        let p = &self.params;
        let mut h = x.to_vec();
        let mut len = self.config.segment_length;
        let mut enc = Vec::with_capacity(self.config.depth);
        for [c0, c1] in &self.layout.enc {
            let mut a = c0.forward(p, &h, len);
            relu_inplace(&mut a);
            let mut b = c1.forward(p, &a, len);
            relu_inplace(&mut b);
            let (pooled, second) = maxpool2(&b, c1.cout, len);
            enc.push(EncTrace {
                input: std::mem::replace(&mut h, pooled),
                a,
                b,
                second,
            });
            len /= 2;
        }
        (enc, h)
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let p = &self.params;
        let l = &self.layout;
        let (enc, flat) = self.encoder(x);
        let mut z = l.compress.forward(p, &flat);
        if self.config.compress_activation == CompressActivation::Relu {
            relu_inplace(&mut z);
        }
        let mut e = l.expand.forward(p, &z);
        relu_inplace(&mut e);
        let mut len = self.config.bottom_length();
        let mut bott_a = l.bottleneck[0].forward(p, &e, len);
        relu_inplace(&mut bott_a);
        let mut bott_b = l.bottleneck[1].forward(p, &bott_a, len);
        relu_inplace(&mut bott_b);

        let mut h = bott_b.clone();
        let mut dec = Vec::with_capacity(self.config.depth);
        for (step, (up, [c0, c1])) in l.up.iter().zip(&l.dec).enumerate() {
            let level = self.config.depth - 1 - step;
            let (up_in, u) = match up {
                Up::Transposed(ct) => {
                    let u = ct.forward(p, &h, len);
                    (std::mem::take(&mut h), u)
                }
                Up::NearestConv(conv) => {
                    let r = repeat2(&h);
                    let u = conv.forward(p, &r, 2 * len);
                    (r, u)
                }
            };
            len *= 2;
            let mut cat = u;
            cat.extend_from_slice(&enc[level].b);
            let mut a = c0.forward(p, &cat, len);
            relu_inplace(&mut a);
            let mut b = c1.forward(p, &a, len);
            relu_inplace(&mut b);
            h = b.clone();
            dec.push(DecTrace { up_in, cat, a, b });
        }
        let out = l.out.forward(p, &h, len);
        Trace {
            enc,
            flat,
            z,
            e,
            bott_a,
            bott_b,
            dec,
            out,
        }
    }

    /// Accumulates into `g` the gradient of the loss whose derivative with
    /// respect to this sample's reconstruction is `dout`.
    fn backprop(&self, t: &Trace, dout: &[f64], g: &mut [f64]) {
        let p = &self.params;
        let l = &self.layout;
        let d = self.config.depth;
        let mut len = self.config.segment_length;
        let last = &t.dec.last().expect("depth >= 1").b;
        let mut dh = l.out.backward(p, g, last, dout, len, true).unwrap();
        let mut dskip: Vec<Vec<f64>> = vec![Vec::new(); d];
        for (step, (up, [c0, c1])) in l.up.iter().zip(&l.dec).enumerate().rev() {
            let level = d - 1 - step;
            let tr = &t.dec[step];
            relu_backward(&tr.b, &mut dh);
            let mut da = c1.backward(p, g, &tr.a, &dh, len, true).unwrap();
            relu_backward(&tr.a, &mut da);
            let mut dcat = c0.backward(p, g, &tr.cat, &da, len, true).unwrap();
            let up_ch = c0.cin / 2;
            dskip[level] = dcat.split_off(up_ch * len);
            let du = dcat;
            len /= 2;
            dh = match up {
                Up::Transposed(ct) => ct.backward(p, g, &tr.up_in, &du, len),
                Up::NearestConv(conv) => {
                    let dr = conv.backward(p, g, &tr.up_in, &du, 2 * len, true).unwrap();
                    repeat2_backward(&dr)
                }
            };
        }
        relu_backward(&t.bott_b, &mut dh);
        let mut da = l.bottleneck[1].backward(p, g, &t.bott_a, &dh, len, true).unwrap();
        relu_backward(&t.bott_a, &mut da);
        let mut de = l.bottleneck[0].backward(p, g, &t.e, &da, len, true).unwrap();
        relu_backward(&t.e, &mut de);
        let mut dz = l.expand.backward(p, g, &t.z, &de, true).unwrap();
        if self.config.compress_activation == CompressActivation::Relu {
            relu_backward(&t.z, &mut dz);
        }
        let mut dh = l.compress.backward(p, g, &t.flat, &dz, true).unwrap();
        for (level, ([c0, c1], tr)) in l.enc.iter().zip(&t.enc).enumerate().rev() {
            len *= 2;
            let mut db = maxpool2_backward(&dh, &tr.second);
            db.iter_mut().zip(&dskip[level]).for_each(|(a, b)| *a += b);
            relu_backward(&tr.b, &mut db);
            let mut da = c1.backward(p, g, &tr.a, &db, len, true).unwrap();
            relu_backward(&tr.a, &mut da);
            dh = c0.backward(p, g, &tr.input, &da, len, level > 0).unwrap_or_default();
        }
    }

    /// Mean squared error over every sample of the batch and its gradient.
    ///
    /// `inputs` is `[B][C][L]`, `targets` `[B][L]`. The batch is cut into
    /// `min(threads, B)` contiguous chunks whose partial gradients are summed
    /// by a fixed pairwise tree, so results depend on the thread count but
    /// not on scheduling.
    pub fn loss_and_grad(&self, inputs: &[f64], targets: &[f64], threads: usize) -> Result<(f64, Vec<f64>)> {
        let b = self.check_batch(inputs)?;
        let l = self.config.segment_length;
        if targets.len() != b * l {
            return Err(Error::Shape(format!(
                "targets hold {} values, expected {} x {}",
                targets.len(),
                b,
                l
            )));
        }
        if b == 0 {
            return Err(invalid("empty batch"));
        }
        let scale = 1.0 / (b * l) as f64;
        let per = self.sample_len();
        let chunk_job = |range: std::ops::Range<usize>| -> (f64, Vec<f64>) {
            let mut g = vec![0.0; self.params.len()];
            let mut loss = 0.0;
            for s in range {
                let t = self.trace(&inputs[s * per..(s + 1) * per]);
                let tgt = &targets[s * l..(s + 1) * l];
                let dout: Vec<f64> = t
                    .out
                    .iter()
                    .zip(tgt)
                    .map(|(r, y)| {
                        loss += (r - y) * (r - y);
                        2.0 * (r - y) * scale
                    })
                    .collect();
                self.backprop(&t, &dout, &mut g);
            }
            (loss * scale, g)
        };
        let n_chunks = threads.clamp(1, b);
        let ranges: Vec<_> = (0..n_chunks)
            .map(|c| (c * b / n_chunks)..((c + 1) * b / n_chunks))
            .collect();
        let parts: Vec<(f64, Vec<f64>)> = if n_chunks == 1 {
            vec![chunk_job(0..b)]
        } else {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n_chunks)
                .build()
                .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
            pool.install(|| ranges.into_par_iter().map(chunk_job).collect())
        };
        Ok(tree_sum(parts))
    }

    /// Gradient of the batch MSE with respect to every parameter.
    pub fn backward(&self, inputs: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        Ok(self.loss_and_grad(inputs, targets, 1)?.1)
    }
}

fn init_bound(info: &TensorInfo, fan_in: usize) -> Option<f64> {
    if info.name.ends_with(".bias") {
        return None;
    }
    if info.name == "out.weight" {
        let fan_out = info.shape[0] * info.shape[2];
        return Some((6.0 / (fan_in + fan_out) as f64).sqrt());
    }
    Some((6.0 / fan_in as f64).sqrt())
}

/// Pairwise reduction with a topology fixed by the number of parts.
fn tree_sum(mut parts: Vec<(f64, Vec<f64>)>) -> (f64, Vec<f64>) {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some((la, mut ga)) = it.next() {
            if let Some((lb, gb)) = it.next() {
                ga.iter_mut().zip(&gb).for_each(|(a, b)| *a += b);
                next.push((la + lb, ga));
            } else {
                next.push((la, ga));
            }
        }
        parts = next;
    }
    parts.pop().expect("at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::config::Upsampling;

    fn tiny(upsampling: Upsampling, depth: usize) -> UNetConfig {
        UNetConfig {
            depth,
            width: 2,
            kernel: 3,
            in_channels: 2,
            segment_length: 16,
            n_features: 4,
            upsampling,
            ..UNetConfig::default()
        }
    }

    fn data(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Uniform::new(-1.0, 1.0);
        (0..n).map(|_| u.sample(&mut rng)).collect()
    }

    #[test]
    fn default_param_counts() {
        let c = param_count(&UNetConfig::default()).unwrap();
        assert_eq!(c.compress_weights, 67_108_864);
        // Layer-shape arithmetic: 1664 + 49280 + 98560 + 196864 + 65664 + 98432 + 49280 + 129.
        assert_eq!(c.conv, 559_873);
        assert_eq!(c.dense, 2 * 67_108_864 + 1024 + 65_536);
        assert_eq!(c.total, c.conv + c.dense);
    }

    #[test]
    fn hand_countable_params() {
        let cfg = UNetConfig {
            width: 1,
            kernel: 1,
            in_channels: 1,
            n_features: 1,
            ..UNetConfig::default()
        };
        // Convs: enc 2 + 2, bottleneck 4 + 6, transposed 5, dec 3 + 2, out 2.
        // Dense: compress 512 + 1, expand 512 + 512.
        let c = param_count(&cfg).unwrap();
        assert_eq!(c.conv, 26);
        assert_eq!(c.dense, 1537);
        assert_eq!(c.total, 1563);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let cfg = tiny(Upsampling::Transposed, 1);
        let a = UNetModel::init(cfg, 5).unwrap();
        let b = UNetModel::init(cfg, 5).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), UNetModel::init(cfg, 6).unwrap().params());
        for t in a.tensors() {
            let vals = &a.params()[t.range()];
            if t.name.ends_with(".bias") {
                assert!(vals.iter().all(|&v| v == 0.0), "{}", t.name);
            } else {
                let fan_in: usize = match t.name.as_str() {
                    n if n.contains("compress") || n.contains("expand") => t.shape[1],
                    n if n.ends_with("up.weight") => t.shape[0],
                    _ => t.shape[1] * t.shape[2],
                };
                let bound = if t.name == "out.weight" {
                    (6.0 / (fan_in + 1) as f64).sqrt()
                } else {
                    (6.0 / fan_in as f64).sqrt()
                };
                assert_eq!(a.init_bound(&t.name), Some(bound));
                assert!(vals.iter().all(|v| v.abs() <= bound), "{}", t.name);
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_features() {
        let m = UNetModel::init(tiny(Upsampling::Transposed, 1), 1).unwrap();
        let (_, f) = m.forward(&vec![0.0; 2 * 2 * 16]).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn compress_activations() {
        let mut cfg = tiny(Upsampling::Transposed, 1);
        let lin = UNetModel::init(cfg, 4).unwrap();
        cfg.compress_activation = CompressActivation::Relu;
        let relu = UNetModel::init(cfg, 4).unwrap();
        assert_eq!(lin.params(), relu.params());
        let x = data(3 * 2 * 16, 5);
        let fl = lin.encode(&x).unwrap();
        let fr = relu.encode(&x).unwrap();
        assert!(fl.iter().any(|&v| v < 0.0));
        for (a, b) in fl.iter().zip(&fr) {
            assert_eq!(a.max(0.0), *b);
        }
        assert_eq!(lin.forward(&x).unwrap().1, fl);
        assert_eq!(relu.forward(&x).unwrap().1, fr);
    }

    #[test]
    fn compress_scaling_is_linear() {
        let mut m = UNetModel::init(tiny(Upsampling::Transposed, 1), 1).unwrap();
        let x = data(2 * 16, 3);
        let (enc, flat) = m.encoder(&x);
        drop(enc);
        let pre = m.layout.compress.forward(m.params(), &flat);
        let w = m.layout.compress;
        for v in &mut m.params_mut()[w.w..w.w + w.nin * w.nout] {
            *v *= 2.5;
        }
        let pre2 = m.layout.compress.forward(m.params(), &flat);
        for (a, b) in pre.iter().zip(&pre2) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shapes_and_errors() {
        let m = UNetModel::init(tiny(Upsampling::Transposed, 2), 1).unwrap();
        let (r, f) = m.forward(&data(3 * 2 * 16, 1)).unwrap();
        assert_eq!((r.len(), f.len()), (3 * 16, 3 * 4));
        assert!(matches!(m.forward(&data(17, 1)), Err(Error::Shape(_))));
        assert!(matches!(
            m.loss_and_grad(&data(2 * 16, 1), &data(15, 2), 1),
            Err(Error::Shape(_))
        ));
        let bad = UNetConfig {
            segment_length: 18,
            depth: 2,
            ..tiny(Upsampling::Transposed, 2)
        };
        assert!(UNetModel::init(bad, 0).is_err());
    }

    fn max_fd_error(cfg: UNetConfig) -> f64 {
        // Zero biases put activations exactly on the ReLU kink, where central
        // differences average the two one-sided slopes; give them random values.
        let mut m = UNetModel::init(cfg, 17).unwrap();
        let names: Vec<_> = m.tensors().filter(|t| t.name.ends_with(".bias")).cloned().collect();
        let noise = data(m.params().len(), 23);
        for t in names {
            for i in t.range() {
                m.params[i] = 0.2 * noise[i];
            }
        }
        let b = 2;
        let x = data(b * cfg.in_channels * cfg.segment_length, 21);
        let y = data(b * cfg.segment_length, 22);
        let (_, g) = m.loss_and_grad(&x, &y, 1).unwrap();
        let h = 1e-5;
        let mut worst = 0.0_f64;
        let mut probe = m.clone();
        for i in 0..m.params().len() {
            let orig = probe.params[i];
            probe.params[i] = orig + h;
            let (lp, _) = probe.loss_and_grad(&x, &y, 1).unwrap();
            probe.params[i] = orig - h;
            let (lm, _) = probe.loss_and_grad(&x, &y, 1).unwrap();
            probe.params[i] = orig;
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - g[i]).abs() / fd.abs().max(g[i].abs()).max(1e-6);
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        for (up, depth) in [
            (Upsampling::Transposed, 1),
            (Upsampling::NearestConv, 1),
            (Upsampling::Transposed, 2),
        ] {
            let err = max_fd_error(tiny(up, depth));
            assert!(err < 1e-4, "{up:?} depth {depth}: {err}");
        }
        let relu = UNetConfig {
            compress_activation: CompressActivation::Relu,
            ..tiny(Upsampling::Transposed, 1)
        };
        let err = max_fd_error(relu);
        assert!(err < 1e-4, "relu compress: {err}");
    }

    #[test]
    fn perfect_reconstruction_has_zero_gradient() {
        let m = UNetModel::init(tiny(Upsampling::Transposed, 1), 2).unwrap();
        let x = data(2 * 2 * 16, 4);
        let (r, _) = m.forward(&x).unwrap();
        let g = m.backward(&x, &r).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicated_batch_keeps_mean_gradient() {
        let m = UNetModel::init(tiny(Upsampling::Transposed, 1), 2).unwrap();
        let x = data(2 * 2 * 16, 4);
        let y = data(2 * 16, 5);
        let g1 = m.backward(&x, &y).unwrap();
        let x2 = [x.clone(), x].concat();
        let y2 = [y.clone(), y].concat();
        let g2 = m.backward(&x2, &y2).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn threaded_gradient_is_reproducible() {
        let m = UNetModel::init(tiny(Upsampling::Transposed, 1), 2).unwrap();
        let x = data(5 * 2 * 16, 4);
        let y = data(5 * 16, 5);
        let (l1, g1) = m.loss_and_grad(&x, &y, 3).unwrap();
        let (l2, g2) = m.loss_and_grad(&x, &y, 3).unwrap();
        assert_eq!(l1.to_bits(), l2.to_bits());
        assert_eq!(g1, g2);
        let (_, gs) = m.loss_and_grad(&x, &y, 1).unwrap();
        for (a, b) in g1.iter().zip(&gs) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
