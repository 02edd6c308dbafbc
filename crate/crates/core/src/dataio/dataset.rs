use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::pnm::{read_pnm, write_pnm};
use super::preprocess::PreprocessSpec;
use crate::error::{config, Error, Result};
use crate::rng::{stream, SplitMix64};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Tensor,
    pub label: usize,
}

/// File list of an on-disk dataset.
///
/// Stored as CSV: a header `#classes=<k>,channels=<c>` followed by one
/// `relative_path,label` line per image. Paths are relative to `root`, the
/// directory holding the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<(String, usize)>,
    pub num_classes: usize,
    pub channels: usize,
}

impl DatasetManifest {
    pub const FILE_NAME: &'static str = "manifest.csv";

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(config("dataset manifest has no entries"));
        }
        if self.num_classes == 0 {
            return Err(config("dataset manifest declares zero classes"));
        }
        if let Some((path, label)) = self.entries.iter().find(|(_, l)| *l >= self.num_classes) {
            return Err(config(format!(
                "{path}: label {label} not below class count {}",
                self.num_classes
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("#classes={},channels={}\n", self.num_classes, self.channels);
        for (path, label) in &self.entries {
            writeln!(out, "{path},{label}").unwrap();
        }
        out
    }

    pub fn parse(text: &str, root: PathBuf) -> Result<Self> {
        let manifest_path = root.join(Self::FILE_NAME).display().to_string();
        let bad = |line: usize, why: String| Error::Format {
            path: manifest_path.clone(),
            reason: format!("line {line}: {why}"),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty manifest".into()))?;
        let mut num_classes = None;
        let mut channels = None;
        for field in header
            .strip_prefix('#')
            .ok_or_else(|| bad(1, "missing '#classes=..,channels=..' header".into()))?
            .split(',')
        {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| bad(1, format!("header field {field:?}")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| bad(1, format!("header value {value:?}")))?;
            match key.trim() {
                "classes" => num_classes = Some(value),
                "channels" => channels = Some(value),
                other => return Err(bad(1, format!("unknown header key {other:?}"))),
            }
        }
        let mut entries = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (path, label) = line
                .rsplit_once(',')
                .ok_or_else(|| bad(i + 1, "expected 'path,label'".into()))?;
            let label = label
                .trim()
                .parse()
                .map_err(|_| bad(i + 1, format!("label {label:?}")))?;
            entries.push((path.to_string(), label));
        }
        let num_classes = num_classes.ok_or_else(|| bad(1, "header lacks classes".into()))?;
        let channels = channels.ok_or_else(|| bad(1, "header lacks channels".into()))?;
        let manifest = Self {
            root,
            entries,
            num_classes,
            channels,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Reads a manifest from a file, or from `manifest.csv` inside a directory.
    pub fn read(path: &Path) -> Result<Self> {
        let file = if path.is_dir() {
            path.join(Self::FILE_NAME)
        } else {
            path.to_path_buf()
        };
        let root = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&std::fs::read_to_string(&file)?, root)
    }
}

/// In-memory labelled images.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub num_classes: usize,
    pub channels: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, num_classes: usize, channels: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(config("dataset is empty"));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.label >= num_classes {
                return Err(config(format!("sample {i}: label {} >= {num_classes} classes", s.label)));
            }
            if s.image.rank() != 3 || s.image.shape()[0] != channels {
                return Err(config(format!(
                    "sample {i}: image shape {:?} does not have {channels} channels",
                    s.image.shape()
                )));
            }
        }
        Ok(Self {
            samples,
            num_classes,
            channels,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Loads every image named by the manifest.
    pub fn load(manifest: &DatasetManifest) -> Result<Self> {
        manifest.validate()?;
        let samples = manifest
            .entries
            .iter()
            .map(|(rel, label)| {
                Ok(Sample {
                    image: read_pnm(&manifest.root.join(rel))?,
                    label: *label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples, manifest.num_classes, manifest.channels)
    }

    /// Writes images as `img_NNNNN.pgm|ppm` plus `manifest.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<DatasetManifest> {
        std::fs::create_dir_all(dir)?;
        let ext = if self.channels == 1 { "pgm" } else { "ppm" };
        let mut entries = Vec::with_capacity(self.len());
        for (i, s) in self.samples.iter().enumerate() {
            let name = format!("img_{i:05}.{ext}");
            write_pnm(&dir.join(&name), &s.image)?;
            entries.push((name, s.label));
        }
        let manifest = DatasetManifest {
            root: dir.to_path_buf(),
            entries,
            num_classes: self.num_classes,
            channels: self.channels,
        };
        std::fs::write(dir.join(DatasetManifest::FILE_NAME), manifest.to_csv())?;
        Ok(manifest)
    }

    /// Resize + normalize every image; all outputs share `(C, target_h, target_w)`.
    pub fn preprocessed(&self, spec: &PreprocessSpec) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(Sample {
                    image: spec.apply(&s.image)?,
                    label: s.label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples, self.num_classes, self.channels)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Self::new(samples, self.num_classes, self.channels)
    }
}

/// Seeded train/test partition. `round(n * test_fraction)` indices go to
/// the test side; both sides are returned in ascending order.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let perm = SplitMix64::derive(seed, stream::SPLIT).permutation(n);
    let n_test = ((n as f64) * test_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut test = perm[..n_test].to_vec();
    let mut train = perm[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

/// Index batches for one epoch. With `shuffle`, the order is a permutation
/// drawn from `seed` and `epoch`; otherwise the original order. The final
/// partial batch is kept.
pub fn batch_indices(n: usize, batch_size: usize, seed: u64, epoch: usize, shuffle: bool) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(config("batch size must be at least 1"));
    }
    if n == 0 {
        return Err(config("cannot batch an empty dataset"));
    }
    let order = if shuffle {
        SplitMix64::derive(seed, stream::SHUFFLE ^ ((epoch as u64) << 16)).permutation(n)
    } else {
        (0..n).collect()
    };
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

/// A stacked batch of images `[B,C,H,W]` with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub images: Tensor,
    pub labels: Vec<usize>,
    pub indices: Vec<usize>,
}

/// Materializes one epoch of stacked batches; images must share a shape.
pub fn batches(dataset: &Dataset, batch_size: usize, seed: u64, epoch: usize, shuffle: bool) -> Result<Vec<Batch>> {
    let groups = batch_indices(dataset.len(), batch_size, seed, epoch, shuffle)?;
    let shape = dataset.samples[0].image.shape().to_vec();
    if dataset.samples.iter().any(|s| s.image.shape() != shape.as_slice()) {
        return Err(config("images differ in shape; preprocess before batching"));
    }
    groups
        .into_iter()
        .map(|idx| {
            let mut data = Vec::with_capacity(idx.len() * dataset.samples[0].image.len());
            let mut labels = Vec::with_capacity(idx.len());
            for &i in &idx {
                data.extend_from_slice(dataset.samples[i].image.data());
                labels.push(dataset.samples[i].label);
            }
            let mut bshape = vec![idx.len()];
            bshape.extend_from_slice(&shape);
            Ok(Batch {
                images: Tensor::from_vec(bshape, data)?,
                labels,
                indices: idx,
            })
        })
        .collect()
}
