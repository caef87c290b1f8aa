//! MSKT tensor files: `"MSKT"`, version byte, rank byte (1 or 2), rank
//! little-endian `u32` dims, then row-major little-endian `f32` values.

use std::path::Path;

use spatial_fusion_core::Matrix;

use crate::report::write_atomic;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MSKT";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MsktError {
    #[error("bad magic {0:?}, expected \"MSKT\"")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("rank {0} is not supported (expected 1 or 2)")]
    BadRank(u8),
    #[error("dims {0:?} overflow the addressable size")]
    DimOverflow(Vec<u32>),
    #[error("truncated: need {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("{0} unexpected bytes after the payload")]
    TrailingBytes(usize),
    #[error("value at index {0} is not finite as a 32-bit float")]
    NonFinite(usize),
}

/// Row vectors are stored as rank 1, everything else as rank 2.
pub fn encode(m: &Matrix) -> Result<Vec<u8>, MsktError> {
    if let Some(i) = m.as_slice().iter().position(|&v| !(v as f32).is_finite()) {
        return Err(MsktError::NonFinite(i));
    }
    let narrow = |n: usize| u32::try_from(n).map_err(|_| MsktError::DimOverflow(vec![u32::MAX]));
    let dims: Vec<u32> = if m.rows() == 1 {
        vec![narrow(m.cols())?]
    } else {
        vec![narrow(m.rows())?, narrow(m.cols())?]
    };
    let mut out = Vec::with_capacity(6 + 4 * dims.len() + 4 * m.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(dims.len() as u8);
    for d in &dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &v in m.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Matrix, MsktError> {
    let need = |n: usize| {
        if bytes.len() < n {
            Err(MsktError::Truncated {
                needed: n,
                found: bytes.len(),
            })
        } else {
            Ok(())
        }
    };
    need(4)?;
    let magic: [u8; 4] = bytes[..4].try_into().expect("four bytes");
    if &magic != MAGIC {
        return Err(MsktError::BadMagic(magic));
    }
    need(6)?;
    if bytes[4] != VERSION {
        return Err(MsktError::UnsupportedVersion(bytes[4]));
    }
    let rank = bytes[5];
    if !(1..=2).contains(&rank) {
        return Err(MsktError::BadRank(rank));
    }
    let header = 6 + 4 * rank as usize;
    need(header)?;
    let dims: Vec<u32> = bytes[6..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("four bytes")))
        .collect();
    let (rows, cols) = if rank == 1 {
        (1, dims[0] as usize)
    } else {
        (dims[0] as usize, dims[1] as usize)
    };
    let payload = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(header))
        .ok_or_else(|| MsktError::DimOverflow(dims.clone()))?;
    need(payload)?;
    if bytes.len() > payload {
        return Err(MsktError::TrailingBytes(bytes.len() - payload));
    }
    let data = bytes[header..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")) as f64)
        .collect();
    Ok(Matrix::from_vec(rows, cols, data).expect("length checked above"))
}

pub fn write_tensor(path: &Path, m: &Matrix) -> Result<()> {
    let bytes = encode(m).map_err(|source| Error::Tensor {
        path: path.into(),
        source,
    })?;
    write_atomic(path, &bytes)
}

pub fn read_tensor(path: &Path) -> Result<Matrix> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|source| Error::Tensor {
        path: path.into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_vector_is_26_bytes() {
        let m = Matrix::row(&[1.0, 2.0, 3.0, 4.0]);
        let bytes = encode(&m).unwrap();
        assert_eq!(bytes.len(), 4 + 1 + 1 + 4 + 16);
        assert_eq!(&bytes[..6], b"MSKT\x01\x01");
        assert_eq!(decode(&bytes).unwrap(), m);
    }

    #[test]
    fn matrix_round_trip() {
        let m =
            Matrix::from_vec(2, 3, vec![0.5, -1.25, 3.0, 1e-3f32 as f64, -0.0, 65504.0]).unwrap();
        let bytes = encode(&m).unwrap();
        assert_eq!(bytes.len(), 6 + 8 + 24);
        assert_eq!(decode(&bytes).unwrap(), m);
    }

    #[test]
    fn distinct_errors() {
        let good = encode(&Matrix::from_vec(2, 2, vec![1.0; 4]).unwrap()).unwrap();
        let mut bad = good.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert_eq!(decode(&bad), Err(MsktError::BadMagic(*b"XXXX")));
        assert!(matches!(
            decode(&good[..good.len() - 1]),
            Err(MsktError::Truncated { .. })
        ));
        assert!(matches!(
            decode(&good[..3]),
            Err(MsktError::Truncated { .. })
        ));
        let mut rank3 = good.clone();
        rank3[5] = 3;
        assert_eq!(decode(&rank3), Err(MsktError::BadRank(3)));
        let mut huge = good[..14].to_vec();
        huge[6..14].copy_from_slice(&[0xff; 8]);
        // (2^32 − 1)² · 4 bytes does not fit in a 64-bit size.
        assert_eq!(
            decode(&huge),
            Err(MsktError::DimOverflow(vec![u32::MAX, u32::MAX]))
        );
        let mut extra = good;
        extra.push(0);
        assert_eq!(decode(&extra), Err(MsktError::TrailingBytes(1)));
        assert_eq!(
            encode(&Matrix::row(&[f64::NAN])),
            Err(MsktError::NonFinite(0))
        );
        assert_eq!(
            encode(&Matrix::row(&[0.0, 1e300])),
            Err(MsktError::NonFinite(1))
        );
    }
}
