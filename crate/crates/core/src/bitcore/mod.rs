//! Packed bit vectors, bitwise primitives and integer-only randomness.
//!
//! Bit value 1 stands for +1 and bit value 0 for -1. Under that reading the
//! agreement count of [`BitVector::xnor`] is the binary dot product and
//! [`BitVector::majority_bit`] is its sign, with `sign(0) = +1`.

mod bitvec;
mod prob;
mod rng;

pub(crate) use bitvec::hamming;
pub use bitvec::{bernoulli_word, random_mask, BitVector, WORD_BITS};
pub use prob::{FixedProb, ParseProbError};
pub use rng::{rng_derive, DeterministicRng};
