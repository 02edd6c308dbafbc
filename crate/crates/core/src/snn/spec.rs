use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};

/// How a LIF neuron's membrane is reset after it fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    #[default]
    ResetToZero,
    SubtractThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    /// Leak factor applied per timestep, in (0, 1).
    pub beta: f64,
    /// Firing threshold.
    pub theta: f64,
    #[serde(default)]
    pub reset_mode: ResetMode,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            beta: 0.9,
            theta: 1.0,
            reset_mode: ResetMode::ResetToZero,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(contract(format!("lif beta {} not in (0,1)", self.beta)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(contract(format!("lif theta {} must be > 0", self.theta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conv2dSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub padding: usize,
}

fn one() -> usize {
    1
}

impl Conv2dSpec {
    /// Output (height, width) for an input of `h` x `w`, or `None` when the
    /// kernel does not fit in the padded input.
    pub fn output_hw(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let ph = h + 2 * self.padding;
        let pw = w + 2 * self.padding;
        if self.kernel > ph || self.kernel > pw || self.stride == 0 {
            return None;
        }
        Some(((ph - self.kernel) / self.stride + 1, (pw - self.kernel) / self.stride + 1))
    }

    pub fn weight_shape(&self) -> [usize; 4] {
        [self.out_channels, self.in_channels, self.kernel, self.kernel]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSpec {
    pub in_features: usize,
    pub out_features: usize,
}

/// One entry of a network's layer list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d(Conv2dSpec),
    Lif(LifParams),
    Flatten,
    Linear(LinearSpec),
}

impl LayerSpec {
    pub fn conv2d(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        Self::Conv2d(Conv2dSpec {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
        })
    }

    pub fn linear(in_features: usize, out_features: usize) -> Self {
        Self::Linear(LinearSpec {
            in_features,
            out_features,
        })
    }

    pub fn lif() -> Self {
        Self::Lif(LifParams::default())
    }

    pub fn has_params(&self) -> bool {
        matches!(self, Self::Conv2d(_) | Self::Linear(_))
    }

    /// Shapes of (weight, bias) for parametric layers.
    pub fn param_shapes(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        match self {
            Self::Conv2d(c) => Some((c.weight_shape().to_vec(), vec![c.out_channels])),
            Self::Linear(l) => Some((vec![l.out_features, l.in_features], vec![l.out_features])),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Conv2d(_) => "conv2d",
            Self::Lif(_) => "lif",
            Self::Flatten => "flatten",
            Self::Linear(_) => "linear",
        }
    }

    /// Output shape for the given input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            Self::Conv2d(c) => {
                if c.in_channels == 0 || c.out_channels == 0 || c.kernel == 0 || c.stride == 0 {
                    return Err(contract("conv2d dimensions and stride must be positive"));
                }
                let &[ch, h, w] = input else {
                    return Err(contract(format!("conv2d expects a [C,H,W] input, got {input:?}")));
                };
                if ch != c.in_channels {
                    return Err(contract(format!(
                        "conv2d expects {} input channels, got {ch}",
                        c.in_channels
                    )));
                }
                let (oh, ow) = c.output_hw(h, w).ok_or_else(|| {
                    contract(format!(
                        "kernel {} larger than padded input {}x{} (padding {})",
                        c.kernel, h, w, c.padding
                    ))
                })?;
                Ok(vec![c.out_channels, oh, ow])
            }
            Self::Lif(p) => {
                p.validate()?;
                Ok(input.to_vec())
            }
            Self::Flatten => Ok(vec![input.iter().product()]),
            Self::Linear(l) => {
                if l.in_features == 0 || l.out_features == 0 {
                    return Err(contract("linear dimensions must be positive"));
                }
                match input {
                    &[n] if n == l.in_features => Ok(vec![l.out_features]),
                    _ => Err(contract(format!(
                        "linear expects input [{}], got {input:?}",
                        l.in_features
                    ))),
                }
            }
        }
    }
}

/// Declarative description of a spiking network.
///
/// JSON schema:
///
/// ```json
/// {
///   "name": "bcu-mini",
///   "timesteps": 8,
///   "input_shape": [1, 16, 16],
///   "num_classes": 2,
///   "layers": [
///     {"kind": "conv2d", "in_channels": 1, "out_channels": 8, "kernel": 3, "stride": 2, "padding": 1},
///     {"kind": "lif", "beta": 0.9, "theta": 1.0, "reset_mode": "reset_to_zero"},
///     {"kind": "flatten"},
///     {"kind": "linear", "in_features": 512, "out_features": 2}
///   ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub timesteps: usize,
    pub input_shape: [usize; 3],
    pub num_classes: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Input and output shapes of every layer: `shapes[0]` is the network
    /// input, `shapes[i + 1]` the output of layer `i`.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        if self.timesteps == 0 {
            return Err(config(format!("{}: timesteps must be positive", self.name)));
        }
        if self.num_classes == 0 {
            return Err(config(format!("{}: num_classes must be positive", self.name)));
        }
        if self.input_shape.contains(&0) {
            return Err(config(format!("{}: input_shape {:?} has a zero dimension", self.name, self.input_shape)));
        }
        let mut shapes = vec![self.input_shape.to_vec()];
        for (i, layer) in self.layers.iter().enumerate() {
            let next = layer
                .output_shape(shapes.last().unwrap())
                .map_err(|e| config(format!("{}: layer {i} ({}): {e}", self.name, layer.kind_name())))?;
            shapes.push(next);
        }
        match self.layers.last() {
            Some(LayerSpec::Linear(l)) if l.out_features == self.num_classes => Ok(shapes),
            Some(LayerSpec::Linear(l)) => Err(config(format!(
                "{}: final linear has {} outputs but num_classes is {}",
                self.name, l.out_features, self.num_classes
            ))),
            _ => Err(config(format!("{}: last layer must be linear", self.name))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.shapes().map(|_| ())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn lif_layer_indices(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::Lif(_)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .filter_map(|l| l.param_shapes())
            .map(|(w, b)| w.iter().product::<usize>() + b.iter().product::<usize>())
            .sum()
    }

    /// Small 10-class network: conv(3->8,k3,s1,p1) -> lif -> conv(8->16,k3,s2,p1) -> lif -> flatten -> linear(->10).
    pub fn fcu_mini(height: usize, width: usize) -> Self {
        let oh = (height + 2 - 3) / 2 + 1;
        let ow = (width + 2 - 3) / 2 + 1;
        Self {
            name: "fcu-mini".into(),
            timesteps: 8,
            input_shape: [3, height, width],
            num_classes: 10,
            layers: vec![
                LayerSpec::conv2d(3, 8, 3, 1, 1),
                LayerSpec::lif(),
                LayerSpec::conv2d(8, 16, 3, 2, 1),
                LayerSpec::lif(),
                LayerSpec::Flatten,
                LayerSpec::linear(16 * oh * ow, 10),
            ],
        }
    }

    /// Small binary network: conv(1->8,k3,s2,p1) -> lif -> flatten -> linear(->2).
    pub fn bcu_mini(height: usize, width: usize) -> Self {
        let oh = (height + 2 - 3) / 2 + 1;
        let ow = (width + 2 - 3) / 2 + 1;
        Self {
            name: "bcu-mini".into(),
            timesteps: 8,
            input_shape: [1, height, width],
            num_classes: 2,
            layers: vec![
                LayerSpec::conv2d(1, 8, 3, 2, 1),
                LayerSpec::lif(),
                LayerSpec::Flatten,
                LayerSpec::linear(8 * oh * ow, 2),
            ],
        }
    }

    /// Looks up a shipped spec by name: `bcu-mini`, `fcu-mini` (16x16 inputs),
    /// `bcu-ref`, `fcu-ref` (the hardware-report reference geometries).
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "bcu-mini" => Some(Self::bcu_mini(16, 16)),
            "fcu-mini" => Some(Self::fcu_mini(16, 16)),
            "bcu-ref" => Some(crate::hw::fixtures::bcu_ref_spec()),
            "fcu-ref" => Some(crate::hw::fixtures::fcu_ref_spec()),
            _ => None,
        }
    }
}
