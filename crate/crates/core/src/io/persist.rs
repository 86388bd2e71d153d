//! Binary eigensystem file.
//!
//! Layout (all little-endian):
//!
//! | bytes        | content                                              |
//! |--------------|------------------------------------------------------|
//! | 4            | magic `HQEV`                                         |
//! | 4            | format version, `u32` (currently 1)                  |
//! | 4            | dimension `N`, `u32`                                 |
//! | 8·N          | eigenvalues, `f64`, ascending                        |
//! | 16·N²        | eigenvectors, column-major, interleaved `(re, im)`   |
//! | 4            | CRC-32 (IEEE) of every preceding byte                |

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::{CMatrix, EigenSystem, OperatorError};

pub const MAGIC: &[u8; 4] = b"HQEV";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 12;
const CRC_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Crc { stored: u32, computed: u32 },
    #[error("decoded eigensystem is invalid: {0}")]
    Invalid(#[from] OperatorError),
}

fn expected_len(n: usize) -> Option<usize> {
    let body = n.checked_mul(n)?.checked_mul(16)?.checked_add(n.checked_mul(8)?)?;
    body.checked_add(HEADER_LEN + CRC_LEN)
}

pub fn encode_eigensystem(eig: &EigenSystem) -> Vec<u8> {
    let n = eig.dimension();
    let mut out = Vec::with_capacity(expected_len(n).unwrap_or(0));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for &v in eig.eigenvalues() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    // nalgebra storage is column-major already.
    for z in eig.eigenvectors().iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode_eigensystem(bytes: &[u8]) -> Result<EigenSystem, PersistError> {
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(PersistError::Corrupt(format!(
            "{} bytes is shorter than the fixed header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(PersistError::BadMagic);
    }
    let version = read_u32(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(PersistError::Version(version));
    }
    let n = read_u32(bytes, 8) as usize;
    match expected_len(n) {
        Some(len) if len == bytes.len() => {}
        _ => {
            return Err(PersistError::Corrupt(format!(
                "dimension {n} does not match file length {}",
                bytes.len()
            )))
        }
    }
    let payload = &bytes[..bytes.len() - CRC_LEN];
    let stored = read_u32(bytes, payload.len());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(PersistError::Crc { stored, computed });
    }

    let values: Vec<f64> = (0..n).map(|i| read_f64(bytes, HEADER_LEN + 8 * i)).collect();
    let base = HEADER_LEN + 8 * n;
    let entries: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let at = base + 16 * k;
            Complex64::new(read_f64(bytes, at), read_f64(bytes, at + 8))
        })
        .collect();
    let vectors = CMatrix::from_vec(n, n, entries);
    Ok(EigenSystem::new(values, vectors)?)
}

pub fn save_eigensystem(eig: &EigenSystem, path: &Path) -> Result<(), PersistError> {
    fs::write(path, encode_eigensystem(eig)).map_err(|source| PersistError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_eigensystem(path: &Path) -> Result<EigenSystem, PersistError> {
    let bytes = fs::read(path).map_err(|source| PersistError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_eigensystem(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{diagonalize, HermitianOperator};

    fn sample() -> EigenSystem {
        let m = CMatrix::from_fn(5, 5, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j { 0.3 * b } else if i > j { -0.3 * a.max(b) } else { 0.0 };
            Complex64::new(1.0 / (1.0 + a + b), im)
        });
        let h = HermitianOperator::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0)).unwrap();
        diagonalize(&h).unwrap()
    }

    #[test]
    fn layout() {
        let e = sample();
        let bytes = encode_eigensystem(&e);
        assert_eq!(bytes.len(), 12 + 8 * 5 + 16 * 25 + 4);
        assert_eq!(&bytes[..4], b"HQEV");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[5, 0, 0, 0]);
        assert_eq!(read_f64(&bytes, 12), e.eigenvalues()[0]);
        let v = e.eigenvectors();
        let at = 12 + 40 + 16 * (2 * 5 + 1);
        assert_eq!(read_f64(&bytes, at), v[(1, 2)].re);
        assert_eq!(read_f64(&bytes, at + 8), v[(1, 2)].im);
    }

    #[test]
    fn decode_errors_are_distinct() {
        let good = encode_eigensystem(&sample());
        assert_eq!(decode_eigensystem(&good).unwrap(), sample());

        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(matches!(decode_eigensystem(&magic), Err(PersistError::BadMagic)));

        let mut version = good.clone();
        version[4] = 2;
        assert!(matches!(decode_eigensystem(&version), Err(PersistError::Version(2))));

        assert!(matches!(
            decode_eigensystem(&good[..good.len() - 1]),
            Err(PersistError::Corrupt(_))
        ));
        assert!(matches!(decode_eigensystem(&good[..7]), Err(PersistError::Corrupt(_))));

        let mut flipped = good.clone();
        flipped[40] ^= 0x01;
        assert!(matches!(decode_eigensystem(&flipped), Err(PersistError::Crc { .. })));
    }
}
