//! Backpropagation through the unrolled timestep loop.
//!
//! The spike nonlinearity is replaced by a rectangular surrogate derivative
//! `dS/dv = 1/(2w)` for `|v - theta| < w`, zero elsewhere. The reset factor
//! (`1 - s_prev` or `theta * s_prev`) is treated as a constant, so no gradient
//! flows through the reset path.

use serde::{Deserialize, Serialize};

use super::loss::cross_entropy;
use crate::error::{contract, Result};
use crate::snn::{
    conv2d_backward_kernel, linear_backward_kernel, run, ConvGeom, LayerSpec, NetworkSpec, ResetMode, Tape,
    WeightSet,
};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateKind {
    #[default]
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateParams {
    #[serde(default)]
    pub kind: SurrogateKind,
    pub width: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            kind: SurrogateKind::Rectangular,
            width: 0.5,
        }
    }
}

impl SurrogateParams {
    pub fn rectangular(width: f64) -> Self {
        Self {
            kind: SurrogateKind::Rectangular,
            width,
        }
    }

    /// Stand-in for `dS/dv` at membrane `v`.
    #[inline]
    pub fn derivative(&self, v: f64, theta: f64) -> f64 {
        match self.kind {
            SurrogateKind::Rectangular => {
                if (v - theta).abs() < self.width {
                    0.5 / self.width
                } else {
                    0.0
                }
            }
        }
    }
}

/// Loss, gradients and the logits of one sample.
#[derive(Debug, Clone)]
pub struct SampleGradient {
    pub loss: f64,
    pub grads: WeightSet,
    pub logits: Tensor,
}

fn backprop_layer(
    spec: &NetworkSpec,
    shapes: &[Vec<usize>],
    weights: &WeightSet,
    grads: &mut WeightSet,
    idx: usize,
    x: &[f64],
    g: &[f64],
    need_dx: bool,
) -> Option<Vec<f64>> {
    let layer = &spec.layers[idx];
    let in_len: usize = shapes[idx].iter().product();
    let mut dx = need_dx.then(|| vec![0.0; in_len]);
    let p = weights.layer(idx).expect("checked weights");
    let gp = grads.layer_mut(idx).expect("grads mirror weights");
    match layer {
        LayerSpec::Conv2d(c) => {
            let geom = ConvGeom::new(c, shapes[idx][1], shapes[idx][2]).expect("checked spec");
            conv2d_backward_kernel(
                &geom,
                x,
                p.weight.data(),
                g,
                gp.weight.data_mut(),
                gp.bias.data_mut(),
                dx.as_deref_mut(),
            );
        }
        LayerSpec::Linear(l) => {
            linear_backward_kernel(l, x, p.weight.data(), g, gp.weight.data_mut(), gp.bias.data_mut(), dx.as_deref_mut());
        }
        _ => unreachable!("only parametric layers"),
    }
    dx
}

/// Walks the static prefix (`0..end`) backwards from gradient `g` at its output.
fn backprop_static(
    spec: &NetworkSpec,
    shapes: &[Vec<usize>],
    weights: &WeightSet,
    grads: &mut WeightSet,
    tape: &Tape,
    end: usize,
    mut g: Vec<f64>,
) {
    for idx in (0..end).rev() {
        if spec.layers[idx].has_params() {
            match backprop_layer(spec, shapes, weights, grads, idx, &tape.static_inputs[idx], &g, idx > 0) {
                Some(dx) => g = dx,
                None => return,
            }
        }
    }
}

/// Gradient of the cross-entropy loss for one sample.
pub fn sample_gradient(
    spec: &NetworkSpec,
    weights: &WeightSet,
    input: &Tensor,
    label: usize,
    surrogate: &SurrogateParams,
) -> Result<SampleGradient> {
    if !(surrogate.width > 0.0) {
        return Err(contract(format!("surrogate width {} must be > 0", surrogate.width)));
    }
    let shapes = spec.shapes()?;
    let mut tape = Tape::default();
    let out = run(spec, weights, input, Some(&mut tape))?;
    let (loss, dlogits) = cross_entropy(&out.logits, label)?;
    let mut grads = WeightSet::zeros(spec);
    let n_layers = spec.layers.len();
    let first_dynamic = tape.first_dynamic;

    if first_dynamic == n_layers {
        backprop_static(spec, &shapes, weights, &mut grads, &tape, n_layers, dlogits.into_data());
        return Ok(SampleGradient {
            loss,
            grads,
            logits: out.logits,
        });
    }

    let inv_t = 1.0 / spec.timesteps as f64;
    let g_step: Vec<f64> = dlogits.data().iter().map(|d| d * inv_t).collect();
    let mut carry: Vec<Vec<f64>> = shapes[1..]
        .iter()
        .zip(&spec.layers)
        .map(|(s, l)| match l {
            LayerSpec::Lif(_) => vec![0.0; s.iter().product()],
            _ => Vec::new(),
        })
        .collect();
    let mut static_grad = vec![0.0; shapes[first_dynamic].iter().product()];

    for step in tape.steps.iter().rev() {
        let mut g = g_step.clone();
        for idx in (first_dynamic..n_layers).rev() {
            match &spec.layers[idx] {
                LayerSpec::Flatten => {}
                LayerSpec::Lif(p) => {
                    let v = step.lif_v[idx].as_ref().expect("taped");
                    let s_prev = step.lif_s_prev[idx].as_ref().expect("taped");
                    let c = &mut carry[idx];
                    for k in 0..g.len() {
                        let dv = g[k] * surrogate.derivative(v[k], p.theta) + c[k];
                        g[k] = dv;
                        c[k] = match p.reset_mode {
                            ResetMode::ResetToZero => p.beta * (1.0 - s_prev[k]) * dv,
                            ResetMode::SubtractThreshold => p.beta * dv,
                        };
                    }
                }
                _ => {
                    let x = step.inputs[idx].as_ref().expect("taped");
                    g = backprop_layer(spec, &shapes, weights, &mut grads, idx, x, &g, true).expect("dx requested");
                }
            }
        }
        if first_dynamic > 0 {
            for (a, b) in static_grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
    }
    if first_dynamic > 0 {
        backprop_static(spec, &shapes, weights, &mut grads, &tape, first_dynamic, static_grad);
    }
    Ok(SampleGradient {
        loss,
        grads,
        logits: out.logits,
    })
}

/// Loss and parameter gradients for one labelled input.
pub fn backward(
    spec: &NetworkSpec,
    weights: &WeightSet,
    input: &Tensor,
    label: usize,
    surrogate: &SurrogateParams,
) -> Result<(f64, WeightSet)> {
    let s = sample_gradient(spec, weights, input, label, surrogate)?;
    Ok((s.loss, s.grads))
}
