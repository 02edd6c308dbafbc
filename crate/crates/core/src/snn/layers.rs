//! Convolution and fully connected kernels, forward and backward.
//!
//! The slice-level kernels work on flat row-major buffers and are shared by
//! inference and training; the `Tensor` wrappers check shapes.

use super::spec::{Conv2dSpec, LayerSpec, LinearSpec};
use crate::error::{contract, Result};
use crate::tensor::Tensor;

/// Geometry of one convolution application.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvGeom {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub o: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub oh: usize,
    pub ow: usize,
}

impl ConvGeom {
    pub fn new(spec: &Conv2dSpec, h: usize, w: usize) -> Option<Self> {
        let (oh, ow) = spec.output_hw(h, w)?;
        Some(Self {
            c: spec.in_channels,
            h,
            w,
            o: spec.out_channels,
            k: spec.kernel,
            stride: spec.stride,
            pad: spec.padding,
            oh,
            ow,
        })
    }

    /// Output positions `lo..hi` along an axis of input length `limit` and
    /// output length `out_len` whose kernel offset `i` lands inside the input.
    #[inline]
    fn valid(&self, i: usize, limit: usize, out_len: usize) -> (usize, usize) {
        let lo = if self.pad > i { (self.pad - i).div_ceil(self.stride) } else { 0 };
        let hi = if limit + self.pad > i {
            ((limit + self.pad - i - 1) / self.stride + 1).min(out_len)
        } else {
            0
        };
        (lo, hi.max(lo))
    }
}

/// Unfolds `x` into rows `r = (c*k + i)*k + j`, each holding the input
/// value seen by kernel offset `(i, j)` of channel `c` at every output
/// position (zero in the padding). Returns which rows are nonzero.
fn im2col(g: &ConvGeom, x: &[f64], col: &mut Vec<f64>) -> Vec<bool> {
    let (k, h, w, s) = (g.k, g.h, g.w, g.stride);
    let n = g.oh * g.ow;
    col.clear();
    col.resize(g.c * k * k * n, 0.0);
    let mut nonzero = vec![false; g.c * k * k];
    for c in 0..g.c {
        let xin = &x[c * h * w..(c + 1) * h * w];
        for i in 0..k {
            let (y0, y1) = g.valid(i, h, g.oh);
            for j in 0..k {
                let (x0, x1) = g.valid(j, w, g.ow);
                let r = (c * k + i) * k + j;
                if x0 == x1 {
                    continue;
                }
                let dst = &mut col[r * n..(r + 1) * n];
                let mut any = false;
                for oy in y0..y1 {
                    let src = &xin[(oy * s + i - g.pad) * w + x0 * s + j - g.pad..];
                    let out = &mut dst[oy * g.ow + x0..oy * g.ow + x1];
                    for (d, &v) in out.iter_mut().zip(src.iter().step_by(s)) {
                        *d = v;
                        any |= v != 0.0;
                    }
                }
                nonzero[r] = any;
            }
        }
    }
    nonzero
}

/// Adds the unfolded gradient `dcol` back onto the input positions it came from.
fn col2im_add(g: &ConvGeom, dcol: &[f64], dx: &mut [f64]) {
    let (k, h, w, s) = (g.k, g.h, g.w, g.stride);
    let n = g.oh * g.ow;
    for c in 0..g.c {
        let dplane = &mut dx[c * h * w..(c + 1) * h * w];
        for i in 0..k {
            let (y0, y1) = g.valid(i, h, g.oh);
            for j in 0..k {
                let (x0, x1) = g.valid(j, w, g.ow);
                let r = (c * k + i) * k + j;
                if x0 == x1 {
                    continue;
                }
                let src = &dcol[r * n..(r + 1) * n];
                for oy in y0..y1 {
                    let drow = &mut dplane[(oy * s + i - g.pad) * w + x0 * s + j - g.pad..];
                    let grow = &src[oy * g.ow + x0..oy * g.ow + x1];
                    for (d, &v) in drow.iter_mut().step_by(s).zip(grow) {
                        *d += v;
                    }
                }
            }
        }
    }
}

pub(crate) fn conv2d_kernel(g: &ConvGeom, x: &[f64], weight: &[f64], bias: &[f64], out: &mut [f64]) {
    let n = g.oh * g.ow;
    let rows = g.c * g.k * g.k;
    let mut col = Vec::new();
    let nonzero = im2col(g, x, &mut col);
    for o in 0..g.o {
        let plane = &mut out[o * n..(o + 1) * n];
        plane.fill(bias[o]);
        let wrow = &weight[o * rows..(o + 1) * rows];
        for r in (0..rows).filter(|&r| nonzero[r]) {
            let wv = wrow[r];
            for (d, &v) in plane.iter_mut().zip(&col[r * n..(r + 1) * n]) {
                *d += wv * v;
            }
        }
    }
}

/// Accumulates parameter gradients into `dweight`/`dbias` and, when given,
/// the input gradient into `dx`.
pub(crate) fn conv2d_backward_kernel(
    g: &ConvGeom,
    x: &[f64],
    weight: &[f64],
    grad_out: &[f64],
    dweight: &mut [f64],
    dbias: &mut [f64],
    dx: Option<&mut [f64]>,
) {
    let n = g.oh * g.ow;
    let rows = g.c * g.k * g.k;
    let mut col = Vec::new();
    let nonzero = im2col(g, x, &mut col);
    let mut dcol = if dx.is_some() { vec![0.0; rows * n] } else { Vec::new() };
    for o in 0..g.o {
        let gplane = &grad_out[o * n..(o + 1) * n];
        dbias[o] += gplane.iter().sum::<f64>();
        if gplane.iter().all(|&v| v == 0.0) {
            continue;
        }
        let dwrow = &mut dweight[o * rows..(o + 1) * rows];
        for r in (0..rows).filter(|&r| nonzero[r]) {
            dwrow[r] += gplane.iter().zip(&col[r * n..(r + 1) * n]).map(|(a, b)| a * b).sum::<f64>();
        }
        if !dcol.is_empty() {
            let wrow = &weight[o * rows..(o + 1) * rows];
            for r in 0..rows {
                let wv = wrow[r];
                for (d, &v) in dcol[r * n..(r + 1) * n].iter_mut().zip(gplane) {
                    *d += wv * v;
                }
            }
        }
    }
    if let Some(dx) = dx {
        col2im_add(g, &dcol, dx);
    }
}

pub(crate) fn linear_kernel(spec: &LinearSpec, x: &[f64], weight: &[f64], bias: &[f64], out: &mut [f64]) {
    let n = spec.in_features;
    for (m, o) in out.iter_mut().enumerate() {
        let row = &weight[m * n..(m + 1) * n];
        *o = bias[m] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

pub(crate) fn linear_backward_kernel(
    spec: &LinearSpec,
    x: &[f64],
    weight: &[f64],
    grad_out: &[f64],
    dweight: &mut [f64],
    dbias: &mut [f64],
    mut dx: Option<&mut [f64]>,
) {
    let n = spec.in_features;
    for (m, &go) in grad_out.iter().enumerate() {
        dbias[m] += go;
        if go == 0.0 {
            continue;
        }
        let row = &weight[m * n..(m + 1) * n];
        let drow = &mut dweight[m * n..(m + 1) * n];
        for j in 0..n {
            drow[j] += go * x[j];
        }
        if let Some(dx) = dx.as_deref_mut() {
            for j in 0..n {
                dx[j] += row[j] * go;
            }
        }
    }
}

/// Cross-correlation of a `[C,H,W]` input with `[O,C,k,k]` weights plus bias.
pub fn conv2d_forward(input: &Tensor, weights: &Tensor, bias: &Tensor, spec: &LayerSpec) -> Result<Tensor> {
    let LayerSpec::Conv2d(conv) = spec else {
        return Err(contract(format!("conv2d_forward given a {} layer", spec.kind_name())));
    };
    let out_shape = spec.output_shape(input.shape())?;
    weights.ensure_shape(&conv.weight_shape(), "conv2d weights")?;
    bias.ensure_shape(&[conv.out_channels], "conv2d bias")?;
    let geom = ConvGeom::new(conv, input.shape()[1], input.shape()[2]).expect("checked by output_shape");
    let mut out = vec![0.0; out_shape.iter().product()];
    conv2d_kernel(&geom, input.data(), weights.data(), bias.data(), &mut out);
    Tensor::from_vec(out_shape, out)
}

/// `out_i = sum_j W_ij x_j + b_i` for a rank-1 input.
pub fn linear_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let &[m, n] = weights.shape() else {
        return Err(contract(format!("linear weights must be rank 2, got {:?}", weights.shape())));
    };
    input.ensure_shape(&[n], "linear input")?;
    bias.ensure_shape(&[m], "linear bias")?;
    let spec = LinearSpec {
        in_features: n,
        out_features: m,
    };
    let mut out = vec![0.0; m];
    linear_kernel(&spec, input.data(), weights.data(), bias.data(), &mut out);
    Tensor::from_vec(vec![m], out)
}
