use crate::error::{config, Result};
use crate::snn::WeightSet;

/// Adam optimizer state with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: WeightSet,
    v: WeightSet,
    t: u64,
}

impl AdamState {
    /// Fresh state (`t = 0`, zero moments) shaped like `weights`.
    pub fn new(weights: &WeightSet, lr: f64) -> Self {
        let mut zero = weights.clone();
        zero.scale(0.0);
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: zero.clone(),
            v: zero,
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

fn same_shapes(a: &WeightSet, b: &WeightSet) -> bool {
    a.slots().len() == b.slots().len()
        && a.slots().iter().zip(b.slots()).all(|(x, y)| x.is_some() == y.is_some())
        && a.tensors().zip(b.tensors()).all(|(x, y)| x.shape() == y.shape())
}

/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`,
/// `w <- w - lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_update(weights: &mut WeightSet, grads: &WeightSet, state: &mut AdamState) -> Result<()> {
    if !same_shapes(weights, grads) || !same_shapes(weights, &state.m) {
        return Err(config("adam: weights, gradients and moments differ in shape"));
    }
    state.t += 1;
    let bc1 = 1.0 - state.beta1.powf(state.t as f64);
    let bc2 = 1.0 - state.beta2.powf(state.t as f64);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.eps);
    let params = weights.tensors_mut().zip(grads.tensors());
    let moments = state.m.tensors_mut().zip(state.v.tensors_mut());
    for ((w, g), (m, v)) in params.zip(moments) {
        let w = w.data_mut();
        let (m, v) = (m.data_mut(), v.data_mut());
        for k in 0..w.len() {
            let gk = g.data()[k];
            m[k] = b1 * m[k] + (1.0 - b1) * gk;
            v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            w[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
