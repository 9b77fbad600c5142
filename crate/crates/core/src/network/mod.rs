//! Binary fully-connected layers built from XNOR + majority voting.
//!
//! A neuron with weight row `w` fires on input `x` iff `w` and `x` agree in
//! at least half of their positions. This is the XNOR form; the XOR form of
//! the same layer is obtained by complementing every row.

mod format;

use std::ops::RangeInclusive;

use crate::bitcore::{bernoulli_word, random_mask, BitVector, DeterministicRng, FixedProb};
use crate::error::{Error, Result};

pub use format::{load_network, save_network, MAGIC};

/// Depths the training presets were explored at. Other depths work but are
/// reported by the harness.
pub const DEFAULT_DEPTH_BOUNDS: RangeInclusive<usize> = 2..=5;

/// Output bit of one neuron: the majority of `xnor(row, input)`.
pub fn neuron_forward(row: &BitVector, input: &BitVector) -> Result<bool> {
    if input.is_empty() {
        return Err(Error::EmptyVector);
    }
    let agree = row.agreements(input)?;
    Ok(2 * agree >= input.len())
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryLayer {
    in_dim: usize,
    rows: Vec<BitVector>,
}

impl BinaryLayer {
    pub fn new(in_dim: usize, rows: Vec<BitVector>) -> Result<Self> {
        if in_dim == 0 || rows.is_empty() {
            return Err(Error::InvalidShape(format!(
                "layer must have in_dim >= 1 and out_dim >= 1, got {in_dim}x{}",
                rows.len()
            )));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != in_dim) {
            return Err(Error::Dimension {
                expected: in_dim,
                found: bad.len(),
            });
        }
        Ok(Self { in_dim, rows })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn popcount(&self) -> usize {
        self.rows.iter().map(BitVector::popcount).sum()
    }

    pub fn forward(&self, input: &BitVector) -> Result<BitVector> {
        if input.len() != self.in_dim {
            return Err(Error::Dimension {
                expected: self.in_dim,
                found: input.len(),
            });
        }
        let x = input.words();
        let n = self.in_dim;
        let mut out = vec![0u64; self.out_dim().div_ceil(64)];
        for (j, row) in self.rows.iter().enumerate() {
            let disagree = crate::bitcore::hamming(row.words(), x);
            // agreements = n - disagree; fire iff 2 * agreements >= n
            if 2 * disagree <= n {
                out[j / 64] |= 1 << (j % 64);
            }
        }
        BitVector::from_words(out, self.out_dim())
    }
}

/// Same as [`BinaryLayer::forward`].
pub fn layer_forward(layer: &BinaryLayer, input: &BitVector) -> Result<BitVector> {
    layer.forward(input)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinaryNetwork {
    layers: Vec<BinaryLayer>,
}

impl BinaryNetwork {
    pub fn new(layers: Vec<BinaryLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidShape("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::InvalidShape(format!(
                    "layer {} expects {} inputs but layer {i} emits {}",
                    i + 1,
                    pair[1].in_dim(),
                    pair[0].out_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Random network with uniformly distributed weights, drawn layer by
    /// layer and row by row with [`random_mask`].
    pub fn init_random(rng: &mut DeterministicRng, sizes: &[usize]) -> Result<Self> {
        validate_sizes(sizes)?;
        let layers = sizes
            .windows(2)
            .map(|w| {
                let rows = (0..w[1])
                    .map(|_| random_mask(rng, w[0], FixedProb::HALF))
                    .collect();
                BinaryLayer::new(w[0], rows)
            })
            .collect::<Result<_>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[BinaryLayer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// `[input_dim, hidden..., output_dim]`.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(BinaryLayer::out_dim))
            .collect()
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.in_dim() * l.out_dim()).sum()
    }

    pub fn forward(&self, input: &BitVector) -> Result<BitVector> {
        let mut layers = self.layers.iter();
        let mut x = layers.next().unwrap().forward(input)?;
        for layer in layers {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    /// Forward pass that also returns the input of every layer, so
    /// `trace[l]` feeds layer `l` and the result is the network output.
    pub fn forward_traced(&self, input: &BitVector) -> Result<(Vec<BitVector>, BitVector)> {
        let mut trace = Vec::with_capacity(self.depth());
        let mut x = input.clone();
        for layer in &self.layers {
            let next = layer.forward(&x)?;
            trace.push(std::mem::replace(&mut x, next));
        }
        Ok((trace, x))
    }

    /// Copy of `self` where each candidate weight flips with probability
    /// `p`. Without a mask every weight is a candidate; with a mask only its
    /// set bits are. Flips are drawn 64 weights at a time in the order of
    /// [`Self::init_random`]; words with no candidate are skipped, so an
    /// all-ones mask behaves like no mask.
    pub fn clone_and_flip(
        &self,
        rng: &mut DeterministicRng,
        p: FixedProb,
        mask: Option<&WeightMask>,
    ) -> Result<Self> {
        if let Some(m) = mask {
            if !m.matches(self) {
                return Err(Error::MaskShape);
            }
        }
        let mut child = self.clone();
        for (li, layer) in child.layers.iter_mut().enumerate() {
            let n = layer.in_dim;
            for (j, row) in layer.rows.iter_mut().enumerate() {
                match mask {
                    None => row.toggle(&random_mask(rng, n, p))?,
                    Some(m) => {
                        let allowed = m.rows[li][j].words();
                        let flips = allowed
                            .iter()
                            .map(|&a| if a == 0 { 0 } else { bernoulli_word(rng, p) & a })
                            .collect();
                        row.toggle(&BitVector::from_words(flips, n)?)?;
                    }
                }
            }
        }
        Ok(child)
    }
}

pub fn network_forward(net: &BinaryNetwork, input: &BitVector) -> Result<BitVector> {
    net.forward(input)
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidShape(format!(
            "need at least input and output widths, got {sizes:?}"
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidShape(format!("zero width in {sizes:?}")));
    }
    Ok(())
}

/// Per-layer, per-row bit masks with the same shape as a network's weights.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightMask {
    rows: Vec<Vec<BitVector>>,
}

impl WeightMask {
    pub fn empty_for(net: &BinaryNetwork) -> Self {
        Self::filled(net, false)
    }

    pub fn full_for(net: &BinaryNetwork) -> Self {
        Self::filled(net, true)
    }

    fn filled(net: &BinaryNetwork, bit: bool) -> Self {
        let rows = net
            .layers()
            .iter()
            .map(|l| {
                let row = if bit {
                    BitVector::ones(l.in_dim())
                } else {
                    BitVector::zeros(l.in_dim())
                };
                vec![row; l.out_dim()]
            })
            .collect();
        Self { rows }
    }

    pub fn matches(&self, net: &BinaryNetwork) -> bool {
        self.rows.len() == net.depth()
            && self.rows.iter().zip(net.layers()).all(|(rows, layer)| {
                rows.len() == layer.out_dim() && rows.iter().all(|r| r.len() == layer.in_dim())
            })
    }

    pub fn layer(&self, l: usize) -> &[BitVector] {
        &self.rows[l]
    }

    pub fn layer_mut(&mut self, l: usize) -> &mut [BitVector] {
        &mut self.rows[l]
    }

    pub fn count(&self) -> usize {
        self.rows.iter().flatten().map(BitVector::popcount).sum()
    }
}
