use super::spec::{LifParams, ResetMode};
use crate::error::{contract, Result};
use crate::tensor::Tensor;

/// Membrane potentials and last-step spikes of one LIF layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    v: Tensor,
    s_prev: Tensor,
}

impl LifState {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            v: Tensor::zeros(shape),
            s_prev: Tensor::zeros(shape),
        }
    }

    pub fn new(v: Tensor, s_prev: Tensor) -> Result<Self> {
        if v.shape() != s_prev.shape() {
            return Err(contract(format!(
                "membrane shape {:?} differs from spike shape {:?}",
                v.shape(),
                s_prev.shape()
            )));
        }
        if s_prev.data().iter().any(|&s| s != 0.0 && s != 1.0) {
            return Err(contract("previous spikes must be 0 or 1"));
        }
        Ok(Self { v, s_prev })
    }

    pub fn v(&self) -> &Tensor {
        &self.v
    }

    pub fn s_prev(&self) -> &Tensor {
        &self.s_prev
    }
}

/// Integrates one step in place: `v` is updated and `s` (last spikes on
/// entry) is overwritten with the new spikes. Returns the number of spikes.
#[inline]
pub(crate) fn lif_kernel(p: &LifParams, v: &mut [f64], s: &mut [f64], input: &[f64]) -> u64 {
    let mut fired = 0;
    for ((v, s), &i) in v.iter_mut().zip(s.iter_mut()).zip(input) {
        *v = match p.reset_mode {
            ResetMode::ResetToZero => p.beta * *v * (1.0 - *s) + i,
            ResetMode::SubtractThreshold => p.beta * (*v - p.theta * *s) + i,
        };
        *s = if *v >= p.theta {
            fired += 1;
            1.0
        } else {
            0.0
        };
    }
    fired
}

/// One discrete LIF update.
///
/// reset_to_zero: `v' = beta * v * (1 - s_prev) + I`;
/// subtract_threshold: `v' = beta * (v - theta * s_prev) + I`.
/// A neuron spikes when `v' >= theta`.
pub fn lif_step(state: &LifState, input_current: &Tensor, params: &LifParams) -> Result<(LifState, Tensor)> {
    params.validate()?;
    input_current.ensure_shape(state.v.shape(), "lif input current")?;
    let mut v = state.v.data().to_vec();
    let mut s = state.s_prev.data().to_vec();
    lif_kernel(params, &mut v, &mut s, input_current.data());
    let shape = state.v.shape().to_vec();
    let spikes = Tensor::from_vec(shape.clone(), s)?;
    let new_state = LifState {
        v: Tensor::from_vec(shape, v)?,
        s_prev: spikes.clone(),
    };
    Ok((new_state, spikes))
}
