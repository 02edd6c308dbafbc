//! 8-bit binary PGM (P5) and PPM (P6) images.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Encodes a `[1,H,W]` or `[3,H,W]` image with values in [0,1] as P5/P6.
/// Values are clamped and rounded to the nearest of 256 levels.
pub fn encode_pnm(image: &Tensor) -> Result<Vec<u8>> {
    let (c, h, w) = match *image.shape() {
        [c @ (1 | 3), h, w] => (c, h, w),
        _ => {
            return Err(crate::error::contract(format!(
                "pnm needs a [1,H,W] or [3,H,W] image, got {:?}",
                image.shape()
            )))
        }
    };
    let magic = if c == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    let d = image.data();
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let v = d[ch * h * w + y * w + x].clamp(0.0, 1.0);
                out.push((v * 255.0).round() as u8);
            }
        }
    }
    Ok(out)
}

/// Decodes P5/P6 into a `[C,H,W]` tensor scaled to [0,1].
pub fn decode_pnm(bytes: &[u8], path: &Path) -> Result<Tensor> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, "truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| format_err(path, "non-ascii header"))?);
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let channels = match fields[0] {
        "P5" => 1,
        "P6" => 3,
        other => return Err(format_err(path, format!("unsupported magic {other:?}"))),
    };
    let num = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| format_err(path, format!("bad {what} {s:?}")))
    };
    let w = num(fields[1], "width")?;
    let h = num(fields[2], "height")?;
    let maxval = num(fields[3], "maxval")?;
    if w == 0 || h == 0 {
        return Err(format_err(path, "zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(format_err(path, format!("maxval {maxval} not in 1..=255")));
    }
    let n = w * h * channels;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| format_err(path, format!("raster needs {n} bytes")))?;
    let scale = maxval as f64;
    let mut data = vec![0.0; n];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..channels {
                data[ch * h * w + y * w + x] = raster[(y * w + x) * channels + ch] as f64 / scale;
            }
        }
    }
    Tensor::from_vec(vec![channels, h, w], data)
}

pub fn read_pnm(path: &Path) -> Result<Tensor> {
    decode_pnm(&std::fs::read(path)?, path)
}

pub fn write_pnm(path: &Path, image: &Tensor) -> Result<()> {
    std::fs::write(path, encode_pnm(image)?)?;
    Ok(())
}
