//! Synthetic blob datasets.
//!
//! Class `c` of `k` is a Gaussian bump centred on a circle around the image
//! centre at angle `2*pi*c/k`, radius `0.3 * min(H,W)`, with width
//! `0.12 * min(H,W)` (odd classes 20% wider). Each pixel gets independent
//! Gaussian noise (sigma 0.05), is clamped to [0,1] and rounded to 8 bits so
//! that saving to PGM/PPM is lossless. Samples are interleaved by class.

use std::path::PathBuf;

use super::dataset::{Dataset, DatasetManifest, Sample};
use crate::error::{config, Result};
use crate::rng::{stream, SplitMix64};
use crate::tensor::Tensor;

pub const NOISE_SIGMA: f64 = 0.05;

/// Centre (row, col) and width of class `class`'s blob.
pub fn blob_geometry(class: usize, classes: usize, h: usize, w: usize) -> (f64, f64, f64) {
    let side = h.min(w) as f64;
    let angle = 2.0 * std::f64::consts::PI * class as f64 / classes as f64;
    let r = 0.3 * side;
    let cy = (h as f64 - 1.0) / 2.0 - r * angle.cos();
    let cx = (w as f64 - 1.0) / 2.0 + r * angle.sin();
    let width = 0.12 * side * if class % 2 == 1 { 1.2 } else { 1.0 };
    (cy, cx, width)
}

pub fn synth_blobs(
    n_per_class: usize,
    classes: usize,
    image_shape: [usize; 3],
    seed: u64,
) -> Result<(DatasetManifest, Dataset)> {
    if classes != 2 && classes != 10 {
        return Err(config(format!("synthetic datasets have 2 or 10 classes, not {classes}")));
    }
    if n_per_class == 0 {
        return Err(config("synthetic dataset would be empty (n = 0)"));
    }
    let [c, h, w] = image_shape;
    if c == 0 || h == 0 || w == 0 {
        return Err(config(format!("bad image shape {image_shape:?}")));
    }
    let mut rng = SplitMix64::derive(seed, stream::SYNTH);
    let mut samples = Vec::with_capacity(n_per_class * classes);
    for i in 0..n_per_class * classes {
        let label = i % classes;
        let (cy, cx, width) = blob_geometry(label, classes, h, w);
        let mut data = Vec::with_capacity(c * h * w);
        for _ in 0..c {
            for y in 0..h {
                for x in 0..w {
                    let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
                    let v = (-d2 / (2.0 * width * width)).exp() + rng.gaussian(0.0, NOISE_SIGMA);
                    data.push((v.clamp(0.0, 1.0) * 255.0).round() / 255.0);
                }
            }
        }
        samples.push(Sample {
            image: Tensor::from_vec(vec![c, h, w], data)?,
            label,
        });
    }
    let ext = if c == 1 { "pgm" } else { "ppm" };
    let manifest = DatasetManifest {
        root: PathBuf::new(),
        entries: samples
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("img_{i:05}.{ext}"), s.label))
            .collect(),
        num_classes: classes,
        channels: c,
    };
    Ok((manifest, Dataset::new(samples, classes, c)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsupported_class_counts() {
        assert!(synth_blobs(5, 3, [1, 8, 8], 0).is_err());
        assert!(synth_blobs(0, 2, [1, 8, 8], 0).is_err());
    }

    #[test]
    fn seeded_and_interleaved() {
        let (m, a) = synth_blobs(4, 2, [1, 12, 12], 7).unwrap();
        let (_, b) = synth_blobs(4, 2, [1, 12, 12], 7).unwrap();
        let (_, c) = synth_blobs(4, 2, [1, 12, 12], 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(m.entries.len(), 8);
        assert_eq!(a.samples.iter().map(|s| s.label).collect::<Vec<_>>(), [0, 1, 0, 1, 0, 1, 0, 1]);
        for s in &a.samples {
            assert!(s.image.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!(s.image.data().iter().all(|&v| ((v * 255.0).round() / 255.0) == v));
        }
    }
}
