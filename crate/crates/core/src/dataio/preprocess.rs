use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};
use crate::tensor::Tensor;

/// Target geometry and per-channel normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSpec {
    pub target_h: usize,
    pub target_w: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl PreprocessSpec {
    /// Mean 0.5 and std 0.5 for every channel, mapping [0,1] onto [-1,1].
    pub fn standard(channels: usize, target_h: usize, target_w: usize) -> Self {
        Self {
            target_h,
            target_w,
            mean: vec![0.5; channels],
            std: vec![0.5; channels],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_h == 0 || self.target_w == 0 {
            return Err(config("preprocess target dimensions must be positive"));
        }
        if self.mean.len() != self.std.len() {
            return Err(config("preprocess mean and std have different channel counts"));
        }
        if self.std.iter().any(|&s| !(s > 0.0)) {
            return Err(config("preprocess std must be positive for every channel"));
        }
        Ok(())
    }

    pub fn apply(&self, image: &Tensor) -> Result<Tensor> {
        self.validate()?;
        let resized = if image.shape()[1..] == [self.target_h, self.target_w] {
            image.clone()
        } else {
            resize_bilinear(image, self.target_h, self.target_w)?
        };
        normalize(&resized, self)
    }
}

fn chw(image: &Tensor) -> Result<(usize, usize, usize)> {
    match *image.shape() {
        [c, h, w] if h > 0 && w > 0 => Ok((c, h, w)),
        _ => Err(contract(format!("expected a [C,H,W] image, got {:?}", image.shape()))),
    }
}

/// Source coordinate and blend weight for output index `dst`, using
/// half-pixel centers (`src = (dst + 0.5) * in/out - 0.5`, clamped to the edge).
fn sample_axis(dst: usize, in_len: usize, out_len: usize) -> (usize, usize, f64) {
    let scale = in_len as f64 / out_len as f64;
    let src = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64);
    let lo = src.floor() as usize;
    let hi = (lo + 1).min(in_len - 1);
    (lo, hi, src - lo as f64)
}

/// Bilinear resize of each channel to `target_h` x `target_w`.
pub fn resize_bilinear(image: &Tensor, target_h: usize, target_w: usize) -> Result<Tensor> {
    if target_h == 0 || target_w == 0 {
        return Err(contract("resize target dimensions must be positive"));
    }
    let (c, h, w) = chw(image)?;
    let ys: Vec<_> = (0..target_h).map(|y| sample_axis(y, h, target_h)).collect();
    let xs: Vec<_> = (0..target_w).map(|x| sample_axis(x, w, target_w)).collect();
    let src = image.data();
    let mut out = Vec::with_capacity(c * target_h * target_w);
    for ch in 0..c {
        let plane = &src[ch * h * w..(ch + 1) * h * w];
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                let top = plane[y0 * w + x0] + fx * (plane[y0 * w + x1] - plane[y0 * w + x0]);
                let bot = plane[y1 * w + x0] + fx * (plane[y1 * w + x1] - plane[y1 * w + x0]);
                out.push(top + fy * (bot - top));
            }
        }
    }
    Tensor::from_vec(vec![c, target_h, target_w], out)
}

/// `(x - mean_c) / std_c` per channel.
pub fn normalize(image: &Tensor, spec: &PreprocessSpec) -> Result<Tensor> {
    let (c, h, w) = chw(image)?;
    if spec.mean.len() != c || spec.std.len() != c {
        return Err(config(format!(
            "image has {c} channels but normalization is defined for {}",
            spec.mean.len()
        )));
    }
    if spec.std.iter().any(|&s| !(s > 0.0)) {
        return Err(config("normalization std must be positive"));
    }
    let mut out = image.data().to_vec();
    for ch in 0..c {
        for x in &mut out[ch * h * w..(ch + 1) * h * w] {
            *x = (*x - spec.mean[ch]) / spec.std[ch];
        }
    }
    Tensor::from_vec(vec![c, h, w], out)
}
