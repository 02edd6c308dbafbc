use super::spec::{LayerSpec, NetworkSpec};
use crate::error::{config, Result};
use crate::rng::{stream, SplitMix64};
use crate::tensor::Tensor;

/// Weight and bias of one parametric layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPair {
    pub weight: Tensor,
    pub bias: Tensor,
}

/// Parameters of a network, one slot per layer (`None` for lif/flatten).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    layers: Vec<Option<ParamPair>>,
}

impl WeightSet {
    pub fn from_layers(layers: Vec<Option<ParamPair>>) -> Self {
        Self { layers }
    }

    pub fn zeros(spec: &NetworkSpec) -> Self {
        let layers = spec
            .layers
            .iter()
            .map(|l| {
                l.param_shapes().map(|(w, b)| ParamPair {
                    weight: Tensor::zeros(&w),
                    bias: Tensor::zeros(&b),
                })
            })
            .collect();
        Self { layers }
    }

    /// Glorot-uniform weights in `+-sqrt(6 / (fan_in + fan_out))`, zero biases.
    /// Draws come from the `INIT` stream of `seed`, in layer order.
    pub fn init(spec: &NetworkSpec, seed: u64) -> Self {
        let mut rng = SplitMix64::derive(seed, stream::INIT);
        let mut set = Self::zeros(spec);
        for (layer, slot) in spec.layers.iter().zip(set.layers.iter_mut()) {
            let Some(pair) = slot else { continue };
            let (fan_in, fan_out) = match layer {
                LayerSpec::Conv2d(c) => (c.in_channels * c.kernel * c.kernel, c.out_channels * c.kernel * c.kernel),
                LayerSpec::Linear(l) => (l.in_features, l.out_features),
                _ => unreachable!(),
            };
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in pair.weight.data_mut() {
                *w = rng.uniform(-bound, bound);
            }
        }
        set
    }

    pub fn layer(&self, index: usize) -> Option<&ParamPair> {
        self.layers.get(index).and_then(|p| p.as_ref())
    }

    pub fn layer_mut(&mut self, index: usize) -> Option<&mut ParamPair> {
        self.layers.get_mut(index).and_then(|p| p.as_mut())
    }

    pub fn slots(&self) -> &[Option<ParamPair>] {
        &self.layers
    }

    /// Every parameter tensor in storage order: per layer, weight then bias.
    pub fn tensors(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flatten().flat_map(|p| [&p.weight, &p.bias])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.layers
            .iter_mut()
            .flatten()
            .flat_map(|p| [&mut p.weight, &mut p.bias])
    }

    /// Record names matching [`Self::tensors`], e.g. `layer0.weight`.
    pub fn tensor_names(&self) -> Vec<String> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_some())
            .flat_map(|(i, _)| [format!("layer{i}.weight"), format!("layer{i}.bias")])
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().map(Tensor::len).sum()
    }

    /// Checks that every slot matches the shapes the spec requires.
    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.layers.len() {
            return Err(config(format!(
                "weight set has {} layer slots, spec {} has {} layers",
                self.layers.len(),
                spec.name,
                spec.layers.len()
            )));
        }
        for (i, (layer, slot)) in spec.layers.iter().zip(&self.layers).enumerate() {
            match (layer.param_shapes(), slot) {
                (None, None) => {}
                (Some((w, b)), Some(pair)) => {
                    if pair.weight.shape() != w.as_slice() || pair.bias.shape() != b.as_slice() {
                        return Err(config(format!(
                            "layer {i}: weights {:?}/{:?} do not match spec {:?}/{:?}",
                            pair.weight.shape(),
                            pair.bias.shape(),
                            w,
                            b
                        )));
                    }
                    if !pair.weight.all_finite() || !pair.bias.all_finite() {
                        return Err(config(format!("layer {i}: non-finite parameter")));
                    }
                }
                (Some(_), None) => return Err(config(format!("layer {i} ({}) has no parameters", layer.kind_name()))),
                (None, Some(_)) => {
                    return Err(config(format!("layer {i} ({}) takes no parameters", layer.kind_name())))
                }
            }
        }
        Ok(())
    }

    /// `self += alpha * other` (shapes must already agree).
    pub(crate) fn add_scaled(&mut self, other: &WeightSet, alpha: f64) {
        for (a, b) in self.tensors_mut().zip(other.tensors()) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += alpha * y;
            }
        }
    }

    pub(crate) fn scale(&mut self, alpha: f64) {
        for t in self.tensors_mut() {
            for x in t.data_mut() {
                *x *= alpha;
            }
        }
    }
}
