//! Surrogate-gradient training: loss, backpropagation through time, Adam,
//! the epoch loop and checkpoints.

mod adam;
mod backward;
mod checkpoint;
mod loss;
mod trainer;

pub use adam::{adam_update, AdamState};
pub use backward::{backward, sample_gradient, SampleGradient, SurrogateKind, SurrogateParams};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, MAGIC, VERSION};
pub use loss::cross_entropy;
pub use trainer::{batch_gradient, evaluate, history_csv, train, EpochRecord, Evaluation, TrainConfig, TrainOutcome};

pub use crate::snn::WeightSet;
