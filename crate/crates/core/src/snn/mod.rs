//! Discrete-time spiking network dynamics.

mod layers;
mod lif;
mod network;
mod spec;
mod weights;

pub use layers::{conv2d_forward, linear_forward};
pub use lif::{lif_step, LifState};
pub use network::{network_forward, ForwardOutput};
pub use spec::{Conv2dSpec, LayerSpec, LifParams, LinearSpec, NetworkSpec, ResetMode};
pub use weights::{ParamPair, WeightSet};

pub(crate) use layers::{conv2d_backward_kernel, linear_backward_kernel, ConvGeom};
pub(crate) use network::{run, Tape};
