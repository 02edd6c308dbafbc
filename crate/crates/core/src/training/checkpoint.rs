//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! "NSNN"            4 bytes magic
//! version   u32     currently 1
//! spec_len  u32     byte length of the JSON spec blob
//! spec      [u8]    UTF-8 JSON NetworkSpec
//! per parameter tensor, layer order, weight before bias:
//!   rank    u32
//!   dims    u32 * rank
//!   payload f64 * product(dims)   IEEE-754
//! ```

use std::fs;
use std::path::Path;

use crate::error::{CheckpointError, Result};
use crate::snn::{NetworkSpec, ParamPair, WeightSet};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"NSNN";
pub const VERSION: u32 = 1;

pub fn encode_checkpoint(weights: &WeightSet, spec: &NetworkSpec) -> Result<Vec<u8>> {
    weights.check(spec)?;
    let blob = serde_json::to_vec(spec)?;
    let mut out = Vec::with_capacity(12 + blob.len() + weights.num_parameters() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(blob.len() as u32).to_le_bytes());
    out.extend_from_slice(&blob);
    for t in weights.tensors() {
        out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &x in t.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, record: &str) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() - self.pos < n {
            return Err(CheckpointError::Truncated { record: record.to_string() });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, record: &str) -> Result<u32, CheckpointError> {
        let b = self.take(4, record)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(WeightSet, NetworkSpec)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic { found: magic.to_vec() }.into());
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(CheckpointError::Version {
            found: version,
            expected: VERSION,
        }
        .into());
    }
    let len = r.u32("spec length")? as usize;
    let blob = r.take(len, "spec blob")?;
    let spec: NetworkSpec =
        serde_json::from_slice(blob).map_err(|e| CheckpointError::SpecBlob(e.to_string()))?;
    spec.validate().map_err(|e| CheckpointError::SpecBlob(e.to_string()))?;

    let mut slots = Vec::with_capacity(spec.layers.len());
    for (i, layer) in spec.layers.iter().enumerate() {
        let Some((wshape, bshape)) = layer.param_shapes() else {
            slots.push(None);
            continue;
        };
        let mut read = |name: String, expected: Vec<usize>| -> Result<Tensor> {
            let rank = r.u32(&name)? as usize;
            let mut dims = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                dims.push(r.u32(&name)? as usize);
            }
            if dims != expected {
                return Err(CheckpointError::ShapeMismatch {
                    record: name,
                    found: dims,
                    expected,
                }
                .into());
            }
            let n: usize = dims.iter().product();
            let payload = r.take(n * 8, &name)?;
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Tensor::from_vec(dims, data)
        };
        let weight = read(format!("layer{i}.weight"), wshape)?;
        let bias = read(format!("layer{i}.bias"), bshape)?;
        slots.push(Some(ParamPair { weight, bias }));
    }
    let rest = bytes.len() - r.pos;
    if rest != 0 {
        return Err(CheckpointError::TrailingBytes(rest).into());
    }
    Ok((WeightSet::from_layers(slots), spec))
}

pub fn save_checkpoint(weights: &WeightSet, spec: &NetworkSpec, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_checkpoint(weights, spec)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(WeightSet, NetworkSpec)> {
    decode_checkpoint(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn sample() -> (WeightSet, NetworkSpec) {
        let spec = NetworkSpec::bcu_mini(6, 6);
        (WeightSet::init(&spec, 3), spec)
    }

    fn ckpt_err(r: Result<(WeightSet, NetworkSpec)>) -> CheckpointError {
        match r {
            Err(Error::Checkpoint(e)) => e,
            other => panic!("expected checkpoint error, got {other:?}"),
        }
    }

    #[test]
    fn header_layout() {
        let (w, spec) = sample();
        let bytes = encode_checkpoint(&w, &spec).unwrap();
        assert_eq!(&bytes[..4], b"NSNN");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let spec_back: NetworkSpec = serde_json::from_slice(&bytes[12..12 + len]).unwrap();
        assert_eq!(spec_back, spec);
        // First record: conv weight [8,1,3,3].
        let rec = &bytes[12 + len..];
        assert_eq!(u32::from_le_bytes(rec[..4].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(rec[4..8].try_into().unwrap()), 8);
    }

    #[test]
    fn bad_magic() {
        let (w, spec) = sample();
        let mut bytes = encode_checkpoint(&w, &spec).unwrap();
        bytes[0] = b'X';
        assert!(matches!(ckpt_err(decode_checkpoint(&bytes)), CheckpointError::BadMagic { .. }));
    }

    #[test]
    fn version_mismatch() {
        let (w, spec) = sample();
        let mut bytes = encode_checkpoint(&w, &spec).unwrap();
        bytes[4] = 2;
        assert_eq!(
            ckpt_err(decode_checkpoint(&bytes)),
            CheckpointError::Version { found: 2, expected: 1 }
        );
    }

    #[test]
    fn truncation_names_record() {
        let (w, spec) = sample();
        let bytes = encode_checkpoint(&w, &spec).unwrap();
        // Cut inside the final tensor (layer3.bias, 2 doubles).
        let cut = &bytes[..bytes.len() - 5];
        assert_eq!(
            ckpt_err(decode_checkpoint(cut)),
            CheckpointError::Truncated { record: "layer3.bias".into() }
        );
        assert_eq!(
            ckpt_err(decode_checkpoint(&bytes[..2])),
            CheckpointError::Truncated { record: "magic".into() }
        );
    }

    #[test]
    fn trailing_bytes() {
        let (w, spec) = sample();
        let mut bytes = encode_checkpoint(&w, &spec).unwrap();
        bytes.push(0);
        assert_eq!(ckpt_err(decode_checkpoint(&bytes)), CheckpointError::TrailingBytes(1));
    }

    #[test]
    fn file_roundtrip() {
        let (w, spec) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.nsnn");
        save_checkpoint(&w, &spec, &path).unwrap();
        let (w2, spec2) = load_checkpoint(&path).unwrap();
        assert_eq!(spec2, spec);
        assert_eq!(w2, w);
    }
}
