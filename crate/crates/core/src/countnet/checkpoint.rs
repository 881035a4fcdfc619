//! Binary model checkpoints.
//!
//! | offset | size | field                                   |
//! |-------:|-----:|-----------------------------------------|
//! | 0      | 4    | magic `RCM1`                            |
//! | 4      | 4    | version (u32, = 1)                      |
//! | 8      | 4    | layer count L (u32, = 2)                |
//! | 12     | 4·(L+1) | layer widths (u32): input, hidden, 1 |
//! | …      | 4    | standardizer present (u32, 0 or 1)      |
//! | …      | 8·…  | f64 values: standardizer mean and scale (if present), then W1, b1, w2, b2 |
//!
//! All values little-endian.

use std::path::Path;

use super::model::{CountModel, Standardizer};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"RCM1";
pub const MODEL_VERSION: u32 = 1;

pub fn encode_model(m: &CountModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    for v in [MODEL_VERSION, 2, m.input_dim as u32, m.hidden as u32, 1] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&u32::from(m.standardizer.is_some()).to_le_bytes());
    if let Some(s) = &m.standardizer {
        for v in s.mean.iter().chain(&s.scale) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for v in &m.params {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn format_err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        offset,
        reason: reason.into(),
    }
}

pub fn decode_model(buf: &[u8]) -> Result<CountModel> {
    let u32_at = |off: usize| -> Result<u32> {
        buf.get(off..off + 4)
            .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
            .ok_or_else(|| format_err(off, "truncated header"))
    };
    if buf.get(0..4) != Some(MODEL_MAGIC.as_slice()) {
        return Err(format_err(0, "bad magic, expected RCM1"));
    }
    let version = u32_at(4)?;
    if version != MODEL_VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    if u32_at(8)? != 2 {
        return Err(format_err(8, "expected 2 layers"));
    }
    let (input_dim, hidden, out) = (u32_at(12)? as usize, u32_at(16)? as usize, u32_at(20)?);
    if out != 1 || input_dim == 0 || hidden == 0 {
        return Err(format_err(12, "invalid layer widths"));
    }
    let has_std = match u32_at(24)? {
        0 => false,
        1 => true,
        v => return Err(format_err(24, format!("invalid standardizer flag {v}"))),
    };
    let n_std = if has_std { 2 * input_dim } else { 0 };
    let n_params = CountModel::n_params(input_dim, hidden);
    let start = 28;
    let expected = start + 8 * (n_std + n_params);
    if buf.len() != expected {
        return Err(format_err(
            buf.len().min(expected),
            format!(
                "payload is {} bytes, expected {}",
                buf.len() - start.min(buf.len()),
                expected - start
            ),
        ));
    }
    let vals: Vec<f64> = buf[start..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let standardizer = has_std.then(|| Standardizer {
        mean: vals[..input_dim].to_vec(),
        scale: vals[input_dim..n_std].to_vec(),
    });
    Ok(CountModel {
        input_dim,
        hidden,
        params: vals[n_std..].to_vec(),
        standardizer,
    })
}

pub fn save_model(m: &CountModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_model(m))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CountModel> {
    let path = path.as_ref();
    let buf = std::fs::read(path).map_err(|source| Error::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    decode_model(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut m = CountModel::init(6, 4, 2);
        assert_eq!(decode_model(&encode_model(&m)).unwrap(), m);
        m.standardizer = Some(Standardizer {
            mean: vec![0.5; 6],
            scale: vec![2.0; 6],
        });
        let bytes = encode_model(&m);
        assert_eq!(bytes.len(), 28 + 8 * (12 + CountModel::n_params(6, 4)));
        assert_eq!(decode_model(&bytes).unwrap(), m);
    }

    #[test]
    fn corrupt_inputs() {
        let m = CountModel::init(3, 2, 0);
        let mut bytes = encode_model(&m);
        assert!(decode_model(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(matches!(decode_model(&bytes), Err(Error::Format { offset: 0, .. })));
    }
}
