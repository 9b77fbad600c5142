//! MNIST ingestion and binarized datasets.

mod idx;

use std::fmt;
use std::fs;
use std::path::Path;

use crate::bitcore::{BitVector, DeterministicRng};
use crate::error::{Error, Result};
use crate::objective::Sample;

pub use idx::{
    labels_to_bytes, pair_counts, parse_idx_images, parse_idx_labels, IdxError, IdxImages, IMAGES_MAGIC,
    LABELS_MAGIC,
};

pub const DEFAULT_THRESHOLD: u8 = 128;
pub const MNIST_PIXELS: usize = 784;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Bit i is set iff `pixels[i] >= threshold`.
pub fn binarize(pixels: &[u8], threshold: u8) -> BitVector {
    BitVector::from_bools(pixels.iter().map(|&p| p >= threshold))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryDataset {
    pub samples: Vec<BitVector>,
    pub labels: Vec<usize>,
    pub split: Split,
}

impl BinaryDataset {
    pub fn from_idx(images: &IdxImages, labels: &[u8], threshold: u8, split: Split) -> Result<Self> {
        pair_counts(images, labels)?;
        let samples = (0..images.count)
            .map(|i| binarize(images.image(i), threshold))
            .collect();
        Ok(Self {
            samples,
            labels: labels.iter().map(|&l| l as usize).collect(),
            split,
        })
    }

    /// Reads `<prefix>-images-idx3-ubyte` and `<prefix>-labels-idx1-ubyte`
    /// from `dir`, where the prefix is `train` or `t10k`.
    pub fn load_mnist(dir: &Path, split: Split, threshold: u8) -> Result<Self> {
        let (images, labels) = read_mnist_files(dir, split)?;
        Self::from_idx(&images, &labels, threshold, split)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn as_samples(&self) -> Vec<Sample<'_>> {
        self.samples.iter().zip(&self.labels).map(|(x, &l)| (x, l)).collect()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            split: self.split,
        }
    }

    /// The first `n` samples (all of them when `n >= len`).
    pub fn truncated(mut self, n: usize) -> Self {
        self.samples.truncate(n);
        self.labels.truncate(n);
        self
    }
}

pub fn read_mnist_files(dir: &Path, split: Split) -> Result<(IdxImages, Vec<u8>)> {
    let prefix = split.prefix();
    let images = parse_idx_images(&fs::read(dir.join(format!("{prefix}-images-idx3-ubyte")))?)?;
    let labels = parse_idx_labels(&fs::read(dir.join(format!("{prefix}-labels-idx1-ubyte")))?)?;
    pair_counts(&images, &labels)?;
    Ok((images, labels))
}

/// Shuffles `0..len` and cuts it into batches of `batch_size`; the last batch
/// may be short.
pub fn make_batches(len: usize, batch_size: usize, rng: &mut DeterministicRng) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
    }
    let mut order: Vec<usize> = (0..len).collect();
    rng.shuffle(&mut order);
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

/// `n` samples drawn without replacement.
pub fn fitness_subset(dataset: &BinaryDataset, n: usize, rng: &mut DeterministicRng) -> Result<BinaryDataset> {
    if n == 0 || n > dataset.len() {
        return Err(Error::InvalidConfig(format!(
            "fitness subset of {n} from {} samples",
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    rng.shuffle(&mut order);
    order.truncate(n);
    Ok(dataset.select(&order))
}
