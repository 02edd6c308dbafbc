//! Timestep loop over a whole network.
//!
//! The static input is injected as current at every step. Layers in front of
//! the first LIF layer see the same input at every step, so they are evaluated
//! once; everything from the first LIF layer on runs `T` times. The readout is
//! the final linear layer's output averaged over the `T` steps.

use super::layers::{conv2d_kernel, linear_kernel, ConvGeom};
use super::lif::lif_kernel;
use super::spec::{LayerSpec, NetworkSpec};
use super::weights::WeightSet;
use crate::error::{config, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub logits: Tensor,
    /// Total spikes emitted by each LIF layer, in layer order.
    pub spike_counts: Vec<u64>,
}

impl ForwardOutput {
    /// Predicted class, ties resolved to the lowest index.
    pub fn prediction(&self) -> usize {
        self.logits.argmax()
    }
}

/// Activations recorded during a forward pass for backpropagation.
#[derive(Debug, Default)]
pub(crate) struct Tape {
    /// Index of the first layer evaluated per timestep.
    pub first_dynamic: usize,
    /// Inputs of the static layers (`0..first_dynamic`).
    pub static_inputs: Vec<Vec<f64>>,
    pub steps: Vec<StepTape>,
}

#[derive(Debug, Default)]
pub(crate) struct StepTape {
    /// Per layer (indexed from 0): input activation for conv/linear layers.
    pub inputs: Vec<Option<Vec<f64>>>,
    /// Per layer: membrane after integration, and spikes entering the step.
    pub lif_v: Vec<Option<Vec<f64>>>,
    pub lif_s_prev: Vec<Option<Vec<f64>>>,
}

fn apply_stateless(layer: &LayerSpec, in_shape: &[usize], out_len: usize, weights: &WeightSet, idx: usize, x: &[f64]) -> Vec<f64> {
    match layer {
        LayerSpec::Conv2d(c) => {
            let p = weights.layer(idx).expect("checked weights");
            let geom = ConvGeom::new(c, in_shape[1], in_shape[2]).expect("checked spec");
            let mut out = vec![0.0; out_len];
            conv2d_kernel(&geom, x, p.weight.data(), p.bias.data(), &mut out);
            out
        }
        LayerSpec::Linear(l) => {
            let p = weights.layer(idx).expect("checked weights");
            let mut out = vec![0.0; out_len];
            linear_kernel(l, x, p.weight.data(), p.bias.data(), &mut out);
            out
        }
        LayerSpec::Flatten => x.to_vec(),
        LayerSpec::Lif(_) => unreachable!("lif is stateful"),
    }
}

pub(crate) fn run(
    spec: &NetworkSpec,
    weights: &WeightSet,
    input: &Tensor,
    mut tape: Option<&mut Tape>,
) -> Result<ForwardOutput> {
    let shapes = spec.shapes()?;
    weights.check(spec)?;
    input
        .ensure_shape(&spec.input_shape, "network input")
        .map_err(|e| config(e.to_string()))?;

    let lens: Vec<usize> = shapes.iter().map(|s| s.iter().product()).collect();
    let n_layers = spec.layers.len();
    let first_dynamic = spec
        .layers
        .iter()
        .position(|l| matches!(l, LayerSpec::Lif(_)))
        .unwrap_or(n_layers);

    let mut cur = input.data().to_vec();
    for (i, layer) in spec.layers[..first_dynamic].iter().enumerate() {
        let next = apply_stateless(layer, &shapes[i], lens[i + 1], weights, i, &cur);
        if let Some(t) = tape.as_deref_mut() {
            t.static_inputs.push(cur);
        }
        cur = next;
    }
    if let Some(t) = tape.as_deref_mut() {
        t.first_dynamic = first_dynamic;
    }

    if first_dynamic == n_layers {
        return Ok(ForwardOutput {
            logits: Tensor::from_vec(shapes[n_layers].clone(), cur)?,
            spike_counts: Vec::new(),
        });
    }

    let static_out = cur;
    let lif_idx = spec.lif_layer_indices();
    let mut v: Vec<Vec<f64>> = vec![Vec::new(); n_layers];
    let mut s: Vec<Vec<f64>> = vec![Vec::new(); n_layers];
    for &i in &lif_idx {
        v[i] = vec![0.0; lens[i + 1]];
        s[i] = vec![0.0; lens[i + 1]];
    }
    let mut spike_counts = vec![0u64; n_layers];
    let mut readout = vec![0.0; lens[n_layers]];

    for _ in 0..spec.timesteps {
        let mut step = tape.as_ref().map(|_| StepTape {
            inputs: vec![None; n_layers],
            lif_v: vec![None; n_layers],
            lif_s_prev: vec![None; n_layers],
        });
        let mut cur = static_out.clone();
        for i in first_dynamic..n_layers {
            let layer = &spec.layers[i];
            cur = match layer {
                LayerSpec::Lif(p) => {
                    if let Some(st) = step.as_mut() {
                        st.lif_s_prev[i] = Some(s[i].clone());
                    }
                    spike_counts[i] += lif_kernel(p, &mut v[i], &mut s[i], &cur);
                    if let Some(st) = step.as_mut() {
                        st.lif_v[i] = Some(v[i].clone());
                    }
                    s[i].clone()
                }
                _ => {
                    let next = apply_stateless(layer, &shapes[i], lens[i + 1], weights, i, &cur);
                    if let Some(st) = step.as_mut() {
                        if layer.has_params() {
                            st.inputs[i] = Some(cur);
                        }
                    }
                    next
                }
            };
        }
        for (r, z) in readout.iter_mut().zip(&cur) {
            *r += z;
        }
        if let (Some(t), Some(st)) = (tape.as_deref_mut(), step) {
            t.steps.push(st);
        }
    }

    let t = spec.timesteps as f64;
    for r in readout.iter_mut() {
        *r /= t;
    }
    Ok(ForwardOutput {
        logits: Tensor::from_vec(shapes[n_layers].clone(), readout)?,
        spike_counts: lif_idx.iter().map(|&i| spike_counts[i]).collect(),
    })
}

/// Runs the network for `spec.timesteps` steps from zero LIF state and
/// returns the time-averaged readout plus per-LIF-layer spike totals.
pub fn network_forward(spec: &NetworkSpec, weights: &WeightSet, input: &Tensor) -> Result<ForwardOutput> {
    run(spec, weights, input, None)
}
