//! IDX containers as used by MNIST: a big-endian magic, big-endian `u32`
//! dimensions, then unsigned bytes in row-major order.

use thiserror::Error;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdxError {
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("IDX file truncated: needed {needed} bytes, had {available}")]
    Truncated { needed: usize, available: usize },

    #[error("IDX file has {0} trailing bytes")]
    Trailing(usize),

    #[error("label {value} at index {index} is outside 0..10")]
    LabelOutOfRange { index: usize, value: u8 },

    #[error("{images} images paired with {labels} labels")]
    CountMismatch { images: usize, labels: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.pixels.len());
        for v in [IMAGES_MAGIC, self.count as u32, self.rows as u32, self.cols as u32] {
            out.extend_from_slice(&v.to_be_bytes());
        }
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn header(bytes: &[u8], magic: u32, dims: usize) -> Result<Vec<usize>, IdxError> {
    let need = 4 * (1 + dims);
    if bytes.len() < 4 {
        return Err(IdxError::Truncated {
            needed: need,
            available: bytes.len(),
        });
    }
    let be = |i: usize| u32::from_be_bytes(bytes[i..i + 4].try_into().unwrap());
    let found = be(0);
    if found != magic {
        return Err(IdxError::BadMagic {
            expected: magic,
            found,
        });
    }
    if bytes.len() < need {
        return Err(IdxError::Truncated {
            needed: need,
            available: bytes.len(),
        });
    }
    Ok((1..=dims).map(|d| be(4 * d) as usize).collect())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8], IdxError> {
    let needed = offset.saturating_add(len);
    match bytes.len().cmp(&needed) {
        std::cmp::Ordering::Less => Err(IdxError::Truncated {
            needed,
            available: bytes.len(),
        }),
        std::cmp::Ordering::Greater => Err(IdxError::Trailing(bytes.len() - needed)),
        std::cmp::Ordering::Equal => Ok(&bytes[offset..]),
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    let dims = header(bytes, IMAGES_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let len = count.saturating_mul(rows).saturating_mul(cols);
    let pixels = payload(bytes, 16, len)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    let dims = header(bytes, LABELS_MAGIC, 1)?;
    let labels = payload(bytes, 8, dims[0])?.to_vec();
    if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &v)| v >= 10) {
        return Err(IdxError::LabelOutOfRange { index, value });
    }
    Ok(labels)
}

pub fn labels_to_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Checks that an image file and a label file describe the same samples.
pub fn pair_counts(images: &IdxImages, labels: &[u8]) -> Result<(), IdxError> {
    if images.count != labels.len() {
        return Err(IdxError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    Ok(())
}
