use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::snn::{LayerSpec, NetworkSpec};

/// Multiply-accumulate counts of one inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacCount {
    /// MACs per layer for a single timestep.
    pub per_layer: Vec<u64>,
    /// Sum of `per_layer` (one timestep).
    pub total_macs: u64,
    pub timesteps: usize,
    /// `total_macs * timesteps / 1e9`.
    pub total_gop: f64,
}

impl MacCount {
    pub fn macs_per_inference(&self) -> u64 {
        self.total_macs * self.timesteps as u64
    }
}

/// conv2d: `out_h * out_w * out_c * in_c * k^2`; linear: `in * out`; lif and flatten: 0.
pub fn count_macs(spec: &NetworkSpec) -> Result<MacCount> {
    let shapes = spec.shapes()?;
    let per_layer: Vec<u64> = spec
        .layers
        .iter()
        .zip(&shapes[1..])
        .map(|(layer, out)| match layer {
            LayerSpec::Conv2d(c) => (out[1] * out[2] * c.out_channels * c.in_channels * c.kernel * c.kernel) as u64,
            LayerSpec::Linear(l) => (l.in_features * l.out_features) as u64,
            LayerSpec::Lif(_) | LayerSpec::Flatten => 0,
        })
        .collect();
    let total_macs = per_layer.iter().sum();
    Ok(MacCount {
        total_gop: (total_macs as f64) * spec.timesteps as f64 / 1e9,
        per_layer,
        total_macs,
        timesteps: spec.timesteps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_linear() {
        let spec = NetworkSpec {
            name: "lin".into(),
            timesteps: 1,
            input_shape: [10, 1, 1],
            num_classes: 10,
            layers: vec![LayerSpec::Flatten, LayerSpec::linear(10, 10)],
        };
        let m = count_macs(&spec).unwrap();
        assert_eq!(m.total_macs, 100);
        assert!((m.total_gop - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn first_fcu_conv() {
        let spec = NetworkSpec::fcu_mini(32, 32);
        let m = count_macs(&spec).unwrap();
        assert_eq!(m.per_layer[0], 8 * 32 * 32 * 3 * 9);
        assert_eq!(m.per_layer[0], 221_184);
        assert_eq!(m.per_layer[1], 0);
    }
}
