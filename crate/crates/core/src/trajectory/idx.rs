//! IDX binary tensor files (the MNIST distribution format).
//!
//! Layout, big-endian throughout: magic `[0x00, 0x00, type, ndim]`, then
//! `ndim` u32 dimension sizes, then the payload in row-major order. Only the
//! unsigned-byte element type (0x08) is supported. Gzip-compressed files are
//! decompressed transparently.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, IdxError, Result};

/// A parsed IDX tensor of unsigned bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxTensor {
    dims: Vec<usize>,
    data: Vec<u8>,
}

impl IdxTensor {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Number of items along the first dimension.
    pub fn len(&self) -> usize {
        self.dims.first().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Size of one item: the product of all dimensions after the first.
    pub fn item_size(&self) -> usize {
        self.dims.iter().skip(1).product()
    }

    /// The `index`-th item as a raw byte slice.
    pub fn item(&self, index: usize) -> Result<&[u8], IdxError> {
        if index >= self.len() {
            return Err(IdxError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        let size = self.item_size();
        Ok(&self.data[index * size..(index + 1) * size])
    }
}

/// Load an IDX file from disk, decompressing gzip content if present.
pub fn load_idx(path: &Path) -> Result<IdxTensor> {
    let mut file = File::open(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    let mut raw = Vec::new();
    file.read_to_end(&mut raw).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut decoder = GzDecoder::new(raw.as_slice());
        let mut decompressed = Vec::new();
        decoder
            .read_to_end(&mut decompressed)
            .map_err(|source| Error::Io {
                path: path.into(),
                source,
            })?;
        raw = decompressed;
    }
    Ok(parse_idx(&raw)?)
}

/// Parse IDX bytes already in memory.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxTensor, IdxError> {
    if bytes.len() < 4 {
        return Err(IdxError::Truncated {
            expected: 4,
            got: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic[0] != 0 || magic[1] != 0 {
        return Err(IdxError::BadMagic { found: magic });
    }
    let type_byte = magic[2];
    if type_byte != 0x08 {
        return Err(IdxError::UnsupportedType(type_byte));
    }
    let ndim = magic[3] as usize;
    let header_len = 4 + 4 * ndim;
    if bytes.len() < header_len {
        return Err(IdxError::Truncated {
            expected: header_len,
            got: bytes.len(),
        });
    }
    let mut dims = Vec::with_capacity(ndim);
    for i in 0..ndim {
        let off = 4 + 4 * i;
        let d = u32::from_be_bytes(bytes[off..off + 4].try_into().unwrap());
        dims.push(d as usize);
    }
    let payload: usize = dims.iter().product();
    let expected = header_len + payload;
    if bytes.len() < expected {
        return Err(IdxError::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    Ok(IdxTensor {
        dims,
        data: bytes[header_len..expected].to_vec(),
    })
}

/// Flatten image `index` of a 3-d image tensor to a row-major `f64` vector,
/// optionally rescaled to unit Euclidean norm.
pub fn mnist_point(
    dataset: &IdxTensor,
    index: usize,
    normalize: bool,
) -> Result<Vec<f64>, IdxError> {
    if dataset.dims().len() != 3 {
        return Err(IdxError::WrongRank {
            expected: 3,
            found: dataset.dims().len(),
        });
    }
    let bytes = dataset.item(index)?;
    let mut v: Vec<f64> = bytes.iter().map(|&b| b as f64).collect();
    if normalize {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(IdxError::ZeroNorm);
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    Ok(v)
}

/// Build IDX bytes from dimensions and payload (used by tests and tooling).
pub fn encode_idx(dims: &[u32], data: &[u8]) -> Vec<u8> {
    let mut out = vec![0x00, 0x00, 0x08, dims.len() as u8];
    for d in dims {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend_from_slice(data);
    out
}
