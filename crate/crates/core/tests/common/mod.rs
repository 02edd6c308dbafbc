//! Independent reference implementations used by the integration tests.
//!
//! Everything here is written as plain loop nests over flat buffers and
//! shares no code with the library beyond its public data types.

#![allow(dead_code)]

use neurosim::rng::SplitMix64;
use neurosim::snn::{LayerSpec, LifParams, NetworkSpec, ParamPair, ResetMode, WeightSet};
use neurosim::Tensor;

/// `|a - b| / max(|a|, |b|)`, or 0 when both are exactly 0.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn random_tensor(rng: &mut SplitMix64, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape.to_vec(), (0..n).map(|_| rng.uniform(lo, hi)).collect()).unwrap()
}

/// Direct cross-correlation over the zero-padded input. `macs` counts every
/// multiply including those against padding.
pub fn naive_conv(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    weight: &[f64],
    bias: &[f64],
    (o, k, stride, pad): (usize, usize, usize, usize),
    macs: &mut u64,
) -> (Vec<f64>, usize, usize) {
    let oh = (h + 2 * pad - k) / stride + 1;
    let ow = (w + 2 * pad - k) / stride + 1;
    let mut out = vec![0.0; o * oh * ow];
    for oc in 0..o {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = bias[oc];
                for ic in 0..c {
                    for i in 0..k {
                        for j in 0..k {
                            *macs += 1;
                            let y = (oy * stride + i) as isize - pad as isize;
                            let xx = (ox * stride + j) as isize - pad as isize;
                            let v = if y < 0 || xx < 0 || y >= h as isize || xx >= w as isize {
                                0.0
                            } else {
                                x[ic * h * w + y as usize * w + xx as usize]
                            };
                            acc += weight[((oc * c + ic) * k + i) * k + j] * v;
                        }
                    }
                }
                out[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    (out, oh, ow)
}

pub fn naive_linear(x: &[f64], weight: &[f64], bias: &[f64], m: usize, macs: &mut u64) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; m];
    for i in 0..m {
        let mut acc = bias[i];
        for j in 0..n {
            *macs += 1;
            acc += weight[i * n + j] * x[j];
        }
        out[i] = acc;
    }
    out
}

/// One LIF update written out per element.
pub fn naive_lif(p: &LifParams, v: &mut [f64], s: &mut [f64], input: &[f64]) {
    for e in 0..v.len() {
        let nv = match p.reset_mode {
            ResetMode::ResetToZero => p.beta * v[e] * (1.0 - s[e]) + input[e],
            ResetMode::SubtractThreshold => p.beta * (v[e] - p.theta * s[e]) + input[e],
        };
        v[e] = nv;
        s[e] = if nv >= p.theta { 1.0 } else { 0.0 };
    }
}

/// Straight-line forward pass: every layer (including the stateless prefix)
/// is re-evaluated at each of the `T` steps, and the final layer's output is
/// averaged over steps. Networks without LIF layers return the single-pass
/// output. Returns logits, per-LIF spike counts and the MACs of one step.
pub fn trace_forward(spec: &NetworkSpec, weights: &WeightSet, input: &[f64]) -> (Vec<f64>, Vec<u64>, u64) {
    let has_lif = spec.layers.iter().any(|l| matches!(l, LayerSpec::Lif(_)));
    let steps = if has_lif { spec.timesteps } else { 1 };
    let mut states: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; spec.layers.len()];
    let mut sum = vec![0.0; spec.num_classes];
    let mut spikes = vec![0u64; spec.layers.iter().filter(|l| matches!(l, LayerSpec::Lif(_))).count()];
    let mut step_macs = 0;
    for t in 0..steps {
        let mut x = input.to_vec();
        let [mut c, mut h, mut w] = spec.input_shape;
        let mut lif_no = 0;
        let mut macs = 0;
        for (idx, layer) in spec.layers.iter().enumerate() {
            match layer {
                LayerSpec::Conv2d(cs) => {
                    let p = weights.layer(idx).unwrap();
                    let (out, oh, ow) = naive_conv(
                        &x,
                        (c, h, w),
                        p.weight.data(),
                        p.bias.data(),
                        (cs.out_channels, cs.kernel, cs.stride, cs.padding),
                        &mut macs,
                    );
                    x = out;
                    (c, h, w) = (cs.out_channels, oh, ow);
                }
                LayerSpec::Linear(ls) => {
                    let p = weights.layer(idx).unwrap();
                    x = naive_linear(&x, p.weight.data(), p.bias.data(), ls.out_features, &mut macs);
                    (c, h, w) = (ls.out_features, 1, 1);
                }
                LayerSpec::Flatten => {
                    (c, h, w) = (c * h * w, 1, 1);
                }
                LayerSpec::Lif(p) => {
                    let (v, s) = states[idx].get_or_insert_with(|| (vec![0.0; x.len()], vec![0.0; x.len()]));
                    naive_lif(p, v, s, &x);
                    spikes[lif_no] += s.iter().filter(|&&b| b == 1.0).count() as u64;
                    lif_no += 1;
                    x = s.clone();
                }
            }
        }
        if t == 0 {
            step_macs = macs;
        }
        for (a, b) in sum.iter_mut().zip(&x) {
            *a += b;
        }
    }
    let logits = sum.iter().map(|v| v / steps as f64).collect();
    (logits, spikes, step_macs)
}

/// Random valid spec with 1 to 3 conv blocks, optional LIFs and a linear head.
pub fn random_spec(rng: &mut SplitMix64, with_lif: bool) -> NetworkSpec {
    let c0 = 1 + rng.below(3) as usize;
    let h0 = 4 + rng.below(8) as usize;
    let w0 = 4 + rng.below(8) as usize;
    let mut layers = Vec::new();
    let (mut c, mut h, mut w) = (c0, h0, w0);
    for _ in 0..rng.below(3) {
        let k = 1 + rng.below(3) as usize;
        let stride = 1 + rng.below(2) as usize;
        let pad = rng.below(2) as usize;
        if h + 2 * pad < k || w + 2 * pad < k {
            break;
        }
        let o = 1 + rng.below(4) as usize;
        layers.push(LayerSpec::conv2d(c, o, k, stride, pad));
        h = (h + 2 * pad - k) / stride + 1;
        w = (w + 2 * pad - k) / stride + 1;
        c = o;
        if with_lif && rng.below(2) == 1 {
            layers.push(LayerSpec::lif());
        }
    }
    layers.push(LayerSpec::Flatten);
    let classes = 2 + rng.below(4) as usize;
    let mut features = c * h * w;
    if rng.below(2) == 1 {
        let hidden = 1 + rng.below(6) as usize;
        layers.push(LayerSpec::linear(features, hidden));
        if with_lif {
            layers.push(LayerSpec::lif());
        }
        features = hidden;
    }
    layers.push(LayerSpec::linear(features, classes));
    NetworkSpec {
        name: "random".into(),
        timesteps: 1 + rng.below(4) as usize,
        input_shape: [c0, h0, w0],
        num_classes: classes,
        layers,
    }
}

/// Weights drawn uniformly from `[-scale, scale]`, biases included.
pub fn random_weights(spec: &NetworkSpec, rng: &mut SplitMix64, scale: f64) -> WeightSet {
    WeightSet::from_layers(
        spec.layers
            .iter()
            .map(|l| {
                l.param_shapes().map(|(ws, bs)| ParamPair {
                    weight: random_tensor(rng, &ws, -scale, scale),
                    bias: random_tensor(rng, &bs, -scale, scale),
                })
            })
            .collect(),
    )
}

/// `-log softmax(logits)[label]` with max subtraction.
pub fn ce_loss(logits: &[f64], label: usize) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Largest relative disagreement between `backward` and central differences
/// of the trace-oracle loss, over every parameter. Relative errors use
/// `max(|a|, |b|, 1e-8)` as the denominator so exact zeros compare cleanly.
pub fn fd_gradient_check(spec: &NetworkSpec, weights: &WeightSet, input: &Tensor, label: usize, h: f64) -> f64 {
    use neurosim::training::{backward, SurrogateParams};
    let (_, grads) = backward(spec, weights, input, label, &SurrogateParams::default()).unwrap();
    let loss_at = |w: &WeightSet| ce_loss(&trace_forward(spec, w, input.data()).0, label);
    let mut probe = weights.clone();
    let mut worst: f64 = 0.0;
    let analytic: Vec<Vec<f64>> = grads.tensors().map(|t| t.data().to_vec()).collect();
    for (ti, g) in analytic.iter().enumerate() {
        for (e, &ga) in g.iter().enumerate() {
            let orig = probe.tensors().nth(ti).unwrap().data()[e];
            probe.tensors_mut().nth(ti).unwrap().data_mut()[e] = orig + h;
            let up = loss_at(&probe);
            probe.tensors_mut().nth(ti).unwrap().data_mut()[e] = orig - h;
            let down = loss_at(&probe);
            probe.tensors_mut().nth(ti).unwrap().data_mut()[e] = orig;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((ga - fd).abs() / ga.abs().max(fd.abs()).max(1e-8));
        }
    }
    worst
}

/// Parameters of the two-neuron network `x -> w1,b1 -> LIF -> w2,b2 -> 2 logits`.
#[derive(Debug, Clone, Copy)]
pub struct TwoNeuron {
    pub x: f64,
    pub w1: f64,
    pub b1: f64,
    pub w2: [f64; 2],
    pub b2: [f64; 2],
    pub beta: f64,
    pub theta: f64,
}

impl TwoNeuron {
    pub fn spec(&self) -> NetworkSpec {
        NetworkSpec {
            name: "two-neuron".into(),
            timesteps: 2,
            input_shape: [1, 1, 1],
            num_classes: 2,
            layers: vec![
                LayerSpec::Flatten,
                LayerSpec::linear(1, 1),
                LayerSpec::Lif(LifParams {
                    beta: self.beta,
                    theta: self.theta,
                    reset_mode: ResetMode::ResetToZero,
                }),
                LayerSpec::linear(1, 2),
            ],
        }
    }

    pub fn weights(&self) -> WeightSet {
        let t = |shape: &[usize], v: &[f64]| Tensor::from_vec(shape.to_vec(), v.to_vec()).unwrap();
        WeightSet::from_layers(vec![
            None,
            Some(ParamPair {
                weight: t(&[1, 1], &[self.w1]),
                bias: t(&[1], &[self.b1]),
            }),
            None,
            Some(ParamPair {
                weight: t(&[2, 1], &self.w2),
                bias: t(&[2], &self.b2),
            }),
        ])
    }

    /// Loss and `[dw1, db1, dw2_0, dw2_1, db2_0, db2_1]` from the chain rule
    /// unrolled over both steps by hand (rectangular surrogate of half-width
    /// `width`, reset factor held constant).
    pub fn oracle(&self, label: usize, width: f64) -> (f64, [f64; 6]) {
        let sigma = |v: f64| if (v - self.theta).abs() < width { 1.0 / (2.0 * width) } else { 0.0 };
        let heaviside = |v: f64| if v >= self.theta { 1.0 } else { 0.0 };
        let a = self.w1 * self.x + self.b1;
        let v1 = a;
        let s1 = heaviside(v1);
        let v2 = self.beta * v1 * (1.0 - s1) + a;
        let s2 = heaviside(v2);
        let rate = (s1 + s2) / 2.0;
        let z = [self.w2[0] * rate + self.b2[0], self.w2[1] * rate + self.b2[1]];
        let m = z[0].max(z[1]);
        let e = [(z[0] - m).exp(), (z[1] - m).exp()];
        let p = [e[0] / (e[0] + e[1]), e[1] / (e[0] + e[1])];
        let loss = -p[label].ln();
        let g = [p[0] - (label == 0) as u8 as f64, p[1] - (label == 1) as u8 as f64];
        let q = (g[0] * self.w2[0] + g[1] * self.w2[1]) / 2.0;
        let dv2 = q * sigma(v2);
        let dv1 = q * sigma(v1) + dv2 * self.beta * (1.0 - s1);
        let da = dv1 + dv2;
        (loss, [da * self.x, da, g[0] * rate, g[1] * rate, g[0], g[1]])
    }
}

/// Per-layer MACs counted by running the loop nests on zeros.
pub fn instrumented_macs(spec: &NetworkSpec) -> Vec<u64> {
    let [mut c, mut h, mut w] = spec.input_shape;
    let mut x = vec![0.0; c * h * w];
    spec.layers
        .iter()
        .map(|layer| {
            let mut macs = 0;
            match layer {
                LayerSpec::Conv2d(cs) => {
                    let k2 = cs.kernel * cs.kernel;
                    let wt = vec![0.0; cs.out_channels * c * k2];
                    let (out, oh, ow) = naive_conv(
                        &x,
                        (c, h, w),
                        &wt,
                        &vec![0.0; cs.out_channels],
                        (cs.out_channels, cs.kernel, cs.stride, cs.padding),
                        &mut macs,
                    );
                    (x, c, h, w) = (out, cs.out_channels, oh, ow);
                }
                LayerSpec::Linear(ls) => {
                    let wt = vec![0.0; ls.out_features * x.len()];
                    x = naive_linear(&x, &wt, &vec![0.0; ls.out_features], ls.out_features, &mut macs);
                    (c, h, w) = (ls.out_features, 1, 1);
                }
                LayerSpec::Flatten => (c, h, w) = (c * h * w, 1, 1),
                LayerSpec::Lif(_) => {}
            }
            macs
        })
        .collect()
}
