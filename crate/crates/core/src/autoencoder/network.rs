//! Layer primitives over channel-major buffers (`[channel][time]`) and the
//! parameter layout of the U-Net.

use super::config::{UNetConfig, Upsampling};

/// Name and shape of one parameter tensor inside the flat vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Conv,
    Dense,
}

/// Same-padded 1D convolution, weights `[out][in][k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Conv {
    pub cin: usize,
    pub cout: usize,
    pub k: usize,
    pub w: usize,
    pub b: usize,
}

/// Transposed convolution with kernel 2 and stride 2, weights `[in][out][2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvT {
    pub cin: usize,
    pub cout: usize,
    pub w: usize,
    pub b: usize,
}

/// Fully connected, weights `[out][in]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Dense {
    pub nin: usize,
    pub nout: usize,
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Up {
    Transposed(ConvT),
    NearestConv(Conv),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    /// Per encoder level: two convolutions.
    pub enc: Vec<[Conv; 2]>,
    pub compress: Dense,
    pub expand: Dense,
    pub bottleneck: [Conv; 2],
    /// Decoder levels from deepest to shallowest.
    pub up: Vec<Up>,
    pub dec: Vec<[Conv; 2]>,
    pub out: Conv,
    pub tensors: Vec<(TensorInfo, Kind, usize)>,
    pub n_params: usize,
}

struct Builder {
    tensors: Vec<(TensorInfo, Kind, usize)>,
    next: usize,
}

impl Builder {
    /// Registers a tensor; `fan_in` drives initialization.
    fn add(&mut self, name: String, shape: Vec<usize>, kind: Kind, fan_in: usize) -> usize {
        let info = TensorInfo {
            name,
            shape,
            offset: self.next,
        };
        self.next += info.len();
        let off = info.offset;
        self.tensors.push((info, kind, fan_in));
        off
    }

    fn conv(&mut self, name: &str, cin: usize, cout: usize, k: usize) -> Conv {
        let w = self.add(format!("{name}.weight"), vec![cout, cin, k], Kind::Conv, cin * k);
        let b = self.add(format!("{name}.bias"), vec![cout], Kind::Conv, 0);
        Conv { cin, cout, k, w, b }
    }

    fn conv_t(&mut self, name: &str, cin: usize, cout: usize) -> ConvT {
        // Each output sample sees one tap per input channel.
        let w = self.add(format!("{name}.weight"), vec![cin, cout, 2], Kind::Conv, cin);
        let b = self.add(format!("{name}.bias"), vec![cout], Kind::Conv, 0);
        ConvT { cin, cout, w, b }
    }

    fn dense(&mut self, name: &str, nin: usize, nout: usize) -> Dense {
        let w = self.add(format!("{name}.weight"), vec![nout, nin], Kind::Dense, nin);
        let b = self.add(format!("{name}.bias"), vec![nout], Kind::Dense, 0);
        Dense { nin, nout, w, b }
    }
}

impl Layout {
    pub fn new(cfg: &UNetConfig) -> Layout {
        let mut b = Builder {
            tensors: Vec::new(),
            next: 0,
        };
        let k = cfg.kernel;
        let d = cfg.depth;
        let mut enc = Vec::with_capacity(d);
        let mut cin = cfg.in_channels;
        for level in 0..d {
            let w = cfg.level_width(level);
            enc.push([
                b.conv(&format!("enc{level}.conv0"), cin, w, k),
                b.conv(&format!("enc{level}.conv1"), w, w, k),
            ]);
            cin = w;
        }
        let flat = cfg.flat_size();
        let compress = b.dense("bottleneck.compress", flat, cfg.n_features);
        let expand = b.dense("bottleneck.expand", cfg.n_features, flat);
        let wb = cfg.level_width(d);
        let bottleneck = [
            b.conv("bottleneck.conv0", cfg.level_width(d - 1), wb, k),
            b.conv("bottleneck.conv1", wb, wb, k),
        ];
        let mut up = Vec::with_capacity(d);
        let mut dec = Vec::with_capacity(d);
        for level in (0..d).rev() {
            let w = cfg.level_width(level);
            let wdeep = cfg.level_width(level + 1);
            up.push(match cfg.upsampling {
                Upsampling::Transposed => Up::Transposed(b.conv_t(&format!("dec{level}.up"), wdeep, w)),
                Upsampling::NearestConv => Up::NearestConv(b.conv(&format!("dec{level}.up"), wdeep, w, k)),
            });
            dec.push([
                b.conv(&format!("dec{level}.conv0"), 2 * w, w, k),
                b.conv(&format!("dec{level}.conv1"), w, w, k),
            ]);
        }
        let out = b.conv("out", cfg.width, 1, 1);
        Layout {
            enc,
            compress,
            expand,
            bottleneck,
            up,
            dec,
            out,
            n_params: b.next,
            tensors: b.tensors,
        }
    }
}

pub(crate) fn relu_inplace(x: &mut [f64]) {
    x.iter_mut().for_each(|v| {
        if *v < 0.0 {
            *v = 0.0
        }
    });
}

/// Zeroes gradient entries whose activation was clipped.
pub(crate) fn relu_backward(activated: &[f64], grad: &mut [f64]) {
    for (g, a) in grad.iter_mut().zip(activated) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Range of output positions `t` for which `t + shift` is inside `[0, len)`.
#[inline]
fn valid_range(len: usize, shift: isize) -> (usize, usize) {
    let lo = (-shift).max(0) as usize;
    let hi = (len as isize - shift).clamp(0, len as isize) as usize;
    (lo.min(hi), hi)
}

impl Conv {
    pub fn forward(&self, p: &[f64], x: &[f64], len: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cin * len);
        let w = &p[self.w..self.w + self.cout * self.cin * self.k];
        let bias = &p[self.b..self.b + self.cout];
        let pad = (self.k - 1) / 2;
        let mut y = vec![0.0; self.cout * len];
        for o in 0..self.cout {
            let yo = &mut y[o * len..(o + 1) * len];
            yo.fill(bias[o]);
            for i in 0..self.cin {
                let xi = &x[i * len..(i + 1) * len];
                for j in 0..self.k {
                    let wv = w[(o * self.cin + i) * self.k + j];
                    let shift = j as isize - pad as isize;
                    let (lo, hi) = valid_range(len, shift);
                    let src = &xi[(lo as isize + shift) as usize..(hi as isize + shift) as usize];
                    for (yv, xv) in yo[lo..hi].iter_mut().zip(src) {
                        *yv += wv * xv;
                    }
                }
            }
        }
        y
    }

    /// Accumulates parameter gradients into `g`; returns the input gradient
    /// when `need_dx`.
    pub fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        x: &[f64],
        dy: &[f64],
        len: usize,
        need_dx: bool,
    ) -> Option<Vec<f64>> {
        let pad = (self.k - 1) / 2;
        let nw = self.cout * self.cin * self.k;
        let mut dx = need_dx.then(|| vec![0.0; self.cin * len]);
        for o in 0..self.cout {
            let dyo = &dy[o * len..(o + 1) * len];
            g[self.b + o] += dyo.iter().sum::<f64>();
            for i in 0..self.cin {
                let xi = &x[i * len..(i + 1) * len];
                for j in 0..self.k {
                    let widx = (o * self.cin + i) * self.k + j;
                    let shift = j as isize - pad as isize;
                    let (lo, hi) = valid_range(len, shift);
                    let s_lo = (lo as isize + shift) as usize;
                    let s_hi = (hi as isize + shift) as usize;
                    let mut acc = 0.0;
                    for (d, xv) in dyo[lo..hi].iter().zip(&xi[s_lo..s_hi]) {
                        acc += d * xv;
                    }
                    g[self.w + widx] += acc;
                    if let Some(dx) = dx.as_mut() {
                        let wv = p[self.w + widx];
                        let dxi = &mut dx[i * len + s_lo..i * len + s_hi];
                        for (dv, d) in dxi.iter_mut().zip(&dyo[lo..hi]) {
                            *dv += wv * d;
                        }
                    }
                }
            }
        }
        debug_assert!(nw > 0);
        dx
    }
}

impl ConvT {
    /// `[cin][len]` to `[cout][2 len]`.
    pub fn forward(&self, p: &[f64], x: &[f64], len: usize) -> Vec<f64> {
        let out_len = 2 * len;
        let mut y = vec![0.0; self.cout * out_len];
        for o in 0..self.cout {
            let yo = &mut y[o * out_len..(o + 1) * out_len];
            yo.fill(p[self.b + o]);
            for i in 0..self.cin {
                let xi = &x[i * len..(i + 1) * len];
                let w0 = p[self.w + (i * self.cout + o) * 2];
                let w1 = p[self.w + (i * self.cout + o) * 2 + 1];
                for (pair, xv) in yo.chunks_exact_mut(2).zip(xi) {
                    pair[0] += w0 * xv;
                    pair[1] += w1 * xv;
                }
            }
        }
        y
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64], len: usize) -> Vec<f64> {
        let out_len = 2 * len;
        let mut dx = vec![0.0; self.cin * len];
        for o in 0..self.cout {
            let dyo = &dy[o * out_len..(o + 1) * out_len];
            g[self.b + o] += dyo.iter().sum::<f64>();
            for i in 0..self.cin {
                let xi = &x[i * len..(i + 1) * len];
                let widx = self.w + (i * self.cout + o) * 2;
                let (w0, w1) = (p[widx], p[widx + 1]);
                let (mut a0, mut a1) = (0.0, 0.0);
                let dxi = &mut dx[i * len..(i + 1) * len];
                for ((pair, xv), dv) in dyo.chunks_exact(2).zip(xi).zip(dxi.iter_mut()) {
                    a0 += pair[0] * xv;
                    a1 += pair[1] * xv;
                    *dv += w0 * pair[0] + w1 * pair[1];
                }
                g[widx] += a0;
                g[widx + 1] += a1;
            }
        }
        dx
    }
}

impl Dense {
    pub fn forward(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.nin);
        (0..self.nout)
            .map(|o| {
                let row = &p[self.w + o * self.nin..self.w + (o + 1) * self.nin];
                p[self.b + o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64], need_dx: bool) -> Option<Vec<f64>> {
        let mut dx = need_dx.then(|| vec![0.0; self.nin]);
        for (o, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g[self.b + o] += d;
            let base = self.w + o * self.nin;
            for (gw, xv) in g[base..base + self.nin].iter_mut().zip(x) {
                *gw += d * xv;
            }
            if let Some(dx) = dx.as_mut() {
                for (dv, wv) in dx.iter_mut().zip(&p[base..base + self.nin]) {
                    *dv += d * wv;
                }
            }
        }
        dx
    }
}

/// Pairwise max-pool along time; returns the pooled map and which element of
/// each pair won (ties go to the first).
pub(crate) fn maxpool2(x: &[f64], channels: usize, len: usize) -> (Vec<f64>, Vec<bool>) {
    let half = len / 2;
    let mut y = Vec::with_capacity(channels * half);
    let mut second = Vec::with_capacity(channels * half);
    for c in 0..channels {
        for pair in x[c * len..(c + 1) * len].chunks_exact(2) {
            let take_second = pair[1] > pair[0];
            second.push(take_second);
            y.push(if take_second { pair[1] } else { pair[0] });
        }
    }
    (y, second)
}

pub(crate) fn maxpool2_backward(dy: &[f64], second: &[bool]) -> Vec<f64> {
    let mut dx = vec![0.0; dy.len() * 2];
    for (i, (&d, &s)) in dy.iter().zip(second).enumerate() {
        dx[2 * i + usize::from(s)] = d;
    }
    dx
}

pub(crate) fn repeat2(x: &[f64]) -> Vec<f64> {
    x.iter().flat_map(|&v| [v, v]).collect()
}

pub(crate) fn repeat2_backward(dy: &[f64]) -> Vec<f64> {
    dy.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_matches_direct_sum() {
        let conv = Conv {
            cin: 2,
            cout: 2,
            k: 3,
            w: 0,
            b: 12,
        };
        let p: Vec<f64> = (0..14).map(|i| (i as f64 * 0.37).sin()).collect();
        let len = 5;
        let x: Vec<f64> = (0..10).map(|i| (i as f64 * 0.91).cos()).collect();
        let y = conv.forward(&p, &x, len);
        for o in 0..2 {
            for t in 0..len {
                let mut acc = p[12 + o];
                for i in 0..2 {
                    for j in 0..3 {
                        let s = t as isize + j as isize - 1;
                        if (0..len as isize).contains(&s) {
                            acc += p[(o * 2 + i) * 3 + j] * x[i * len + s as usize];
                        }
                    }
                }
                assert!((y[o * len + t] - acc).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn transposed_conv_doubles_length() {
        let ct = ConvT {
            cin: 1,
            cout: 1,
            w: 0,
            b: 2,
        };
        let p = [2.0, 3.0, 0.5];
        let y = ct.forward(&p, &[1.0, -1.0], 2);
        assert_eq!(y, vec![2.5, 3.5, -1.5, -2.5]);
    }

    #[test]
    fn pooling_round_trip() {
        let (y, s) = maxpool2(&[1.0, 3.0, 2.0, 2.0], 1, 4);
        assert_eq!(y, vec![3.0, 2.0]);
        assert_eq!(maxpool2_backward(&[5.0, 7.0], &s), vec![0.0, 5.0, 7.0, 0.0]);
        assert_eq!(repeat2_backward(&repeat2(&[1.0, 2.0])), vec![2.0, 4.0]);
    }
}
