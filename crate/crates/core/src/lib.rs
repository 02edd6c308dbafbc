//! Spiking-network simulator with a mixed-signal converter model and an
//! FPGA/ASIC performance model.
//!
//! * [`snn`]: LIF dynamics, convolution/linear layers, the timestep loop.
//! * [`training`]: surrogate-gradient backprop, Adam, checkpoints.
//! * [`dataio`]: PGM/PPM datasets, preprocessing, batching, synthetic blobs.
//! * [`mixed_signal`]: ADC/DAC quantizers, CRC-8 SPI frames, the analog loop.
//! * [`hw`]: MAC counts, resource/latency/power reports, calibration.

pub mod dataio;
pub mod error;
pub mod hw;
pub mod mixed_signal;
pub mod rng;
pub mod snn;
pub mod tensor;
pub mod training;

pub use error::{CheckpointError, Error, FrameError, Result};
pub use tensor::Tensor;
