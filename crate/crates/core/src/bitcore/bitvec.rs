use std::fmt;

use super::{DeterministicRng, FixedProb};
use crate::error::{Error, Result};

pub const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a `len`-bit vector.
#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// A packed sequence of bits, little-endian within and across 64-bit words.
///
/// Bits past `len` in the last word are always zero, so word-level equality
/// and popcount need no masking.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self {
            words: vec![!0; words_for(len)],
            len,
        };
        v.clear_padding();
        v
    }

    /// Builds a vector from `0`/`1` values; any non-zero entry counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                *words.last_mut().unwrap() |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { words, len }
    }

    /// Wraps raw words, zeroing any padding. Fails if `words` is not exactly
    /// the number of words needed for `len` bits.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::Dimension {
                expected: words_for(len),
                found: words.len(),
            });
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { words, len })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, bit: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let m = 1u64 << (index % WORD_BITS);
        let w = &mut self.words[index / WORD_BITS];
        if bit {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the set bits, ascending.
    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Returns 0 only when zeros strictly outnumber ones; ties give 1.
    pub fn majority_bit(&self) -> Result<bool> {
        if self.len == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(2 * self.popcount() >= self.len)
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Dimension {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut v = Self {
            words,
            len: self.len,
        };
        v.clear_padding();
        Ok(v)
    }

    /// Bit i is 1 iff both inputs agree at i.
    pub fn xnor(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| !(a ^ b))
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn and(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn complement(&self) -> Self {
        let mut v = Self {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        v.clear_padding();
        v
    }

    /// Number of positions where the two vectors agree, without building the
    /// XNOR vector.
    pub fn agreements(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self.len - hamming(&self.words, &other.words))
    }

    pub fn flip_bit(&self, index: usize) -> Result<Self> {
        let mut v = self.clone();
        v.flip_in_place(index)?;
        Ok(v)
    }

    pub fn flip_in_place(&mut self, index: usize) -> Result<()> {
        if index >= self.len {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len,
            });
        }
        self.words[index / WORD_BITS] ^= 1 << (index % WORD_BITS);
        Ok(())
    }

    /// XORs `mask` into `self`, toggling every bit set in the mask.
    pub fn toggle(&mut self, mask: &Self) -> Result<()> {
        self.check_len(mask)?;
        for (w, m) in self.words.iter_mut().zip(&mask.words) {
            *w ^= m;
        }
        Ok(())
    }

    /// True when every bit past `len` in the last word is zero.
    pub fn padding_is_canonical(&self) -> bool {
        self.words.len() == words_for(self.len)
            && self
                .words
                .last()
                .is_none_or(|&w| w & !tail_mask(self.len) == 0)
    }

    fn clear_padding(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }
}

/// Hamming distance between equal-length word slices. Uses the hardware
/// population count when the CPU has one.
#[inline]
pub(crate) fn hamming(a: &[u64], b: &[u64]) -> usize {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("popcnt") {
        // SAFETY: the feature was detected at runtime.
        return unsafe { hamming_popcnt(a, b) };
    }
    hamming_words(a, b)
}

#[inline(always)]
fn hamming_words(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
unsafe fn hamming_popcnt(a: &[u64], b: &[u64]) -> usize {
    hamming_words(a, b)
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({}; ", self.len)?;
        if self.len <= 128 {
            for b in self.iter() {
                f.write_str(if b { "1" } else { "0" })?;
            }
        } else {
            write!(f, "popcount {}", self.popcount())?;
        }
        f.write_str(")")
    }
}

/// 64 independent Bernoulli(`p`) bits from one stream.
///
/// Lane i is set iff `U_i < p.threshold()`, where `U_i` is a uniform 32-bit
/// value whose bit k is bit i of the k-th draw counted from the most
/// significant plane. Planes are drawn only until every lane is decided, so
/// small and very large `p` need few draws. `p = 0` draws nothing.
pub fn bernoulli_word(rng: &mut DeterministicRng, p: FixedProb) -> u64 {
    let t = p.threshold();
    if t == 0 {
        return 0;
    }
    let (mut below, mut equal) = (0u64, !0u64);
    for k in (0..32).rev() {
        let plane = rng.next_u64();
        if t >> k & 1 == 1 {
            below |= equal & !plane;
            equal &= plane;
        } else {
            equal &= !plane;
        }
        if equal == 0 {
            break;
        }
    }
    below
}

/// Mask whose bits are independently set with probability `p`, one
/// [`bernoulli_word`] per 64 bits in index order.
pub fn random_mask(rng: &mut DeterministicRng, len: usize, p: FixedProb) -> BitVector {
    let mut v = BitVector::zeros(len);
    for word in v.words.iter_mut() {
        *word = bernoulli_word(rng, p);
    }
    if let Some(last) = v.words.last_mut() {
        *last &= tail_mask(len);
    }
    v
}
