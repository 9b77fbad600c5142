use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("majority of an empty bit vector is undefined")]
    EmptyVector,

    #[error("bit index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid network shape: {0}")]
    InvalidShape(String),

    #[error("wrong mask does not match the network shape")]
    MaskShape,

    #[error("invalid label codec: {0}")]
    InvalidCodec(String),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("empty elite")]
    EmptyElite,

    #[error("invalid evolver configuration: {0}")]
    InvalidConfig(String),

    #[error("bad network file magic")]
    NetworkMagic,

    #[error("network file truncated: needed {needed} bytes, had {available}")]
    NetworkTruncated { needed: usize, available: usize },

    #[error("network file declares sizes that overflow: {0}")]
    NetworkSizeOverflow(String),

    #[error("network file has {0} trailing bytes")]
    NetworkTrailing(usize),

    #[error(transparent)]
    Idx(#[from] crate::data::IdxError),

    #[error(transparent)]
    Io(#[from] io::Error),
}
