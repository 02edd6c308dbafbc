//! Image datasets: on-disk format, preprocessing, batching and synthetic generators.

mod dataset;
mod pnm;
mod preprocess;
mod synth;

pub use dataset::{batch_indices, batches, split_indices, Batch, Dataset, DatasetManifest, Sample};
pub use pnm::{decode_pnm, encode_pnm, read_pnm, write_pnm};
pub use preprocess::{normalize, resize_bilinear, PreprocessSpec};
pub use synth::{blob_geometry, synth_blobs, NOISE_SIGMA};

/// Default share of samples held out for testing.
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
