//! Majority loss over groups of output bits, exact accuracy, lineage scores.
//!
//! The output of a network is split into one group of `bits_per_label` bits
//! per class; the predicted class is the group with the most ones. All
//! scores are integers in parts per million.

use rayon::prelude::*;

use crate::bitcore::{BitVector, FixedProb};
use crate::error::{Error, Result};
use crate::network::BinaryNetwork;

pub const PPM: u64 = 1_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LabelCodec {
    classes: usize,
    bits_per_label: usize,
}

impl LabelCodec {
    pub fn new(classes: usize, bits_per_label: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidCodec(format!("need at least 2 classes, got {classes}")));
        }
        if bits_per_label == 0 {
            return Err(Error::InvalidCodec("bits_per_label must be >= 1".into()));
        }
        Ok(Self {
            classes,
            bits_per_label,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn bits_per_label(&self) -> usize {
        self.bits_per_label
    }

    /// Network output width this codec expects.
    pub fn width(&self) -> usize {
        self.classes * self.bits_per_label
    }

    fn check_width(&self, found: usize) -> Result<()> {
        if found != self.width() {
            return Err(Error::Dimension {
                expected: self.width(),
                found,
            });
        }
        Ok(())
    }

    /// Ones per class group, in class order.
    pub fn group_counts(&self, output: &BitVector) -> Result<Vec<usize>> {
        self.check_width(output.len())?;
        let k = self.bits_per_label;
        let mut counts = vec![0; self.classes];
        for i in output.ones_indices() {
            counts[i / k] += 1;
        }
        Ok(counts)
    }

    /// Class whose group holds the most ones; the lowest index wins ties.
    pub fn predict_class(&self, output: &BitVector) -> Result<usize> {
        let counts = self.group_counts(output)?;
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate().skip(1) {
            if n > counts[best] {
                best = c;
            }
        }
        Ok(best)
    }

    /// All ones in the label's group, zeros elsewhere.
    pub fn target_output(&self, label: usize) -> Result<BitVector> {
        if label >= self.classes {
            return Err(Error::LabelOutOfRange {
                label,
                classes: self.classes,
            });
        }
        let mut v = BitVector::zeros(self.width());
        let k = self.bits_per_label;
        for i in label * k..(label + 1) * k {
            v.set(i, true);
        }
        Ok(v)
    }
}

pub fn predict_class(output: &BitVector, codec: &LabelCodec) -> Result<usize> {
    codec.predict_class(output)
}

pub fn target_output(label: usize, codec: &LabelCodec) -> Result<BitVector> {
    codec.target_output(label)
}

/// Exact top-1 accuracy.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fitness {
    pub correct: u64,
    pub total: u64,
}

impl Fitness {
    pub fn new(correct: u64, total: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::EmptySamples);
        }
        assert!(correct <= total, "{correct} correct of {total}");
        Ok(Self { correct, total })
    }

    /// `floor(correct * 10^6 / total)`.
    pub fn ppm(&self) -> u32 {
        (self.correct * PPM / self.total) as u32
    }
}

/// A borrowed labelled sample.
pub type Sample<'a> = (&'a BitVector, usize);

/// Counts correct top-1 predictions of `net` over `samples`. Samples are
/// split across the rayon pool; the count does not depend on the split.
pub fn evaluate_accuracy(
    net: &BinaryNetwork,
    samples: &[Sample<'_>],
    codec: &LabelCodec,
) -> Result<Fitness> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    codec.check_width(net.output_dim())?;
    let correct = samples
        .par_iter()
        .map(|&(x, label)| -> Result<u64> {
            let out = net.forward(x)?;
            Ok((codec.predict_class(&out)? == label) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Fitness::new(correct, samples.len() as u64)
}

/// `floor((lambda * ancestor + (2^32 - lambda) * current) / 2^32)`.
pub fn blend_score(current_ppm: u32, ancestor_ppm: u32, lambda: FixedProb) -> u32 {
    let l = lambda.threshold() as u64;
    let blended = l * ancestor_ppm as u64 + ((1u64 << 32) - l) * current_ppm as u64;
    (blended >> 32) as u32
}

/// A network with its current fitness and lineage-blended score.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScoredNetwork {
    pub net: BinaryNetwork,
    pub current_ppm: u32,
    pub lineage_ppm: u32,
}

impl ScoredNetwork {
    /// A network without ancestors: its lineage is its own fitness.
    pub fn founder(net: BinaryNetwork, current_ppm: u32) -> Self {
        Self {
            net,
            current_ppm,
            lineage_ppm: current_ppm,
        }
    }
}
