//! Weights file layout, all integers and floats little-endian:
//!
//! ```text
//! magic            8 bytes  "RMPPIWTS"
//! version          u32
//! config hash      u32 length, then UTF-8 bytes
//! dims             u32 x 5: input (7), hidden1, hidden2, dense, output (3)
//! norm mean        f64 x 7
//! norm std         f64 x 7
//! arrays           f64, row-major, in this order:
//!                  lstm1.w (7 x 4H1), lstm1.u (H1 x 4H1), lstm1.b (4H1),
//!                  lstm2.w (H1 x 4H2), lstm2.u (H2 x 4H2), lstm2.b (4H2),
//!                  fc1.w (H2 x D), fc1.b (D), fc2.w (D x 3), fc2.b (3)
//! ```

use std::io::{Read, Write};

use super::adam::Parameters;
use super::{Architecture, ModelWeights};
use crate::dataset::{MOTION_DIM, TUPLE_DIM};
use crate::error::{Error, Result};
use crate::Scalar;

pub const WEIGHTS_MAGIC: &[u8; 8] = b"RMPPIWTS";
pub const WEIGHTS_VERSION: u32 = 1;

fn bad(detail: impl Into<String>) -> Error {
    Error::Format { what: "weights file", detail: detail.into() }
}

pub fn write_weights<S: Scalar, W: Write>(mut w: W, weights: &ModelWeights<S>, config_hash: &str) -> Result<()> {
    weights.check_shapes()?;
    let arch = weights.architecture();
    w.write_all(WEIGHTS_MAGIC)?;
    w.write_all(&WEIGHTS_VERSION.to_le_bytes())?;
    w.write_all(&(config_hash.len() as u32).to_le_bytes())?;
    w.write_all(config_hash.as_bytes())?;
    for d in [TUPLE_DIM, arch.hidden1, arch.hidden2, arch.dense, MOTION_DIM] {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    let norm = weights.norm.mean.iter().chain(weights.norm.std.iter());
    for v in norm.chain(weights.tensors().into_iter().flatten()) {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| bad("truncated header"))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| bad("truncated data"))?;
    let v = f64::from_le_bytes(b);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad("non-finite value"))
    }
}

/// Reads a weights file; returns the embedded config hash and the weights.
pub fn read_weights<S: Scalar, R: Read>(mut r: R) -> Result<(String, ModelWeights<S>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != WEIGHTS_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(&mut r)?;
    if version != WEIGHTS_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = read_u32(&mut r)? as usize;
    if len > 4096 {
        return Err(bad("config hash too long"));
    }
    let mut hash = vec![0u8; len];
    r.read_exact(&mut hash).map_err(|_| bad("truncated header"))?;
    let hash = String::from_utf8(hash).map_err(|_| bad("config hash is not UTF-8"))?;
    let mut dims = [0usize; 5];
    for d in dims.iter_mut() {
        *d = read_u32(&mut r)? as usize;
    }
    if dims[0] != TUPLE_DIM || dims[4] != MOTION_DIM {
        return Err(bad(format!("input/output dims {}/{}, expected {TUPLE_DIM}/{MOTION_DIM}", dims[0], dims[4])));
    }
    if dims[1..4].iter().any(|&d| d == 0 || d > 1 << 16) {
        return Err(bad("layer widths out of range"));
    }
    let mut weights = ModelWeights::<S>::zeros(Architecture { hidden1: dims[1], hidden2: dims[2], dense: dims[3] });
    for v in weights.norm.mean.iter_mut() {
        *v = S::lit(read_f64(&mut r)?);
    }
    for v in weights.norm.std.iter_mut() {
        let s = read_f64(&mut r)?;
        if s <= 0.0 {
            return Err(bad("non-positive normalization scale"));
        }
        *v = S::lit(s);
    }
    for t in weights.tensors_mut() {
        for v in t.iter_mut() {
            *v = S::lit(read_f64(&mut r)?);
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok((hash, weights))
}

#[cfg(test)]
mod tests {
    use super::super::init_weights;
    use super::*;

    #[test]
    fn save_load_save_is_byte_identical() {
        let mut w = init_weights::<f64>(Architecture::DEFAULT, 9);
        w.norm.mean[2] = 0.125;
        w.norm.std[4] = 0.03;
        let mut a = Vec::new();
        write_weights(&mut a, &w, "cafe").unwrap();
        let (hash, back) = read_weights::<f64, _>(a.as_slice()).unwrap();
        assert_eq!(hash, "cafe");
        assert_eq!(back, w);
        let mut b = Vec::new();
        write_weights(&mut b, &back, "cafe").unwrap();
        assert_eq!(a, b);
        let expected_len = 8 + 4 + 4 + 4 + 20 + 14 * 8 + w.num_params() * 8;
        assert_eq!(a.len(), expected_len);
    }

    #[test]
    fn rejects_corruption() {
        let w = init_weights::<f64>(Architecture { hidden1: 3, hidden2: 2, dense: 2 }, 0);
        let mut a = Vec::new();
        write_weights(&mut a, &w, "").unwrap();
        assert!(read_weights::<f64, _>(&a[..a.len() - 1]).is_err());
        let mut extra = a.clone();
        extra.push(0);
        assert!(read_weights::<f64, _>(extra.as_slice()).is_err());
        let mut magic = a.clone();
        magic[0] = b'X';
        assert!(read_weights::<f64, _>(magic.as_slice()).is_err());
    }

    #[test]
    fn f32_load_matches_cast() {
        let w = init_weights::<f64>(Architecture { hidden1: 4, hidden2: 3, dense: 2 }, 1);
        let mut a = Vec::new();
        write_weights(&mut a, &w, "h").unwrap();
        let (_, w32) = read_weights::<f32, _>(a.as_slice()).unwrap();
        assert_eq!(w32, w.cast::<f32>());
    }
}
