use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its allowed domain.
    #[error("invalid parameter: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not match.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The conditioning event Y > 0 is degenerate (Y = 0 occurs with
    /// positive probability for the given direction pair).
    #[error("degenerate conditioning: {0}")]
    DegenerateConditioning(String),

    /// IDX dataset parsing or lookup failure.
    #[error(transparent)]
    Idx(#[from] IdxError),

    /// File I/O failure with path context.
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Configuration file could not be parsed or is invalid.
    #[error("config error: {0}")]
    Config(String),
}

/// Errors specific to the IDX binary tensor format.
#[derive(Debug, Error)]
pub enum IdxError {
    #[error("bad IDX magic: expected 0x0000, type byte, ndim; got {found:02x?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported IDX element type 0x{0:02x} (only unsigned byte 0x08)")]
    UnsupportedType(u8),

    #[error("truncated IDX payload: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },

    #[error("index {index} out of range for dataset of {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("item has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("expected an image tensor with {expected} dimensions, found {found}")]
    WrongRank { expected: usize, found: usize },

    #[error("i/o error reading IDX data: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
