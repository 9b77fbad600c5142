//! Backward attribution of batch-majority output errors to weights.
//!
//! With `B` samples and threshold `ceil(B/2)`:
//!
//! * an output bit is wrong when it differs from its target bit on at least
//!   the threshold number of samples; those samples are its wrong samples;
//! * a weight feeding a wrong bit is wrong when its XNOR vote equals the bit's
//!   produced value on at least the threshold number of wrong samples;
//! * an input node is wrong when strictly more than half of the weights
//!   leaving it are wrong.
//!
//! Wrong input nodes of layer `l` become the wrong output bits of layer
//! `l - 1`. Hidden bits have no target, so every sample is a wrong sample
//! and the value to match is whatever the node produced.

use crate::bitcore::{BitVector, WORD_BITS};
use crate::error::{Error, Result};
use crate::network::{BinaryNetwork, WeightMask};
use crate::objective::{LabelCodec, Sample};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WrongMask {
    /// Wrong weights, shaped like the network.
    pub weights: WeightMask,
    /// Per layer, wrong input nodes (`in_dim` bits).
    pub nodes: Vec<BitVector>,
    /// Wrong bits of the network output.
    pub outputs: BitVector,
}

impl WrongMask {
    pub fn weight_count(&self) -> usize {
        self.weights.count()
    }
}

/// Lanes of word `wi` whose bit-sliced count is `>= threshold`.
fn at_least(counter: &[u64], words: usize, wi: usize, planes: usize, threshold: usize) -> u64 {
    if threshold >> planes != 0 {
        return 0;
    }
    let (mut gt, mut eq) = (0u64, !0u64);
    for k in (0..planes).rev() {
        let plane = counter[k * words + wi];
        if threshold >> k & 1 == 1 {
            eq &= plane;
        } else {
            gt |= eq & plane;
            eq &= !plane;
        }
    }
    gt | eq
}

pub fn mark_wrong(net: &BinaryNetwork, batch: &[Sample<'_>], codec: &LabelCodec) -> Result<WrongMask> {
    if batch.is_empty() {
        return Err(Error::EmptySamples);
    }
    if net.output_dim() != codec.width() {
        return Err(Error::Dimension {
            expected: codec.width(),
            found: net.output_dim(),
        });
    }
    let depth = net.depth();
    let b = batch.len();
    let threshold = b.div_ceil(2);

    // acts[l][s] is the input of layer l for sample s; acts[depth] the output.
    let mut acts: Vec<Vec<BitVector>> = vec![Vec::with_capacity(b); depth + 1];
    let mut targets = Vec::with_capacity(b);
    for &(x, label) in batch {
        let (trace, out) = net.forward_traced(x)?;
        for (l, a) in trace.into_iter().enumerate() {
            acts[l].push(a);
        }
        acts[depth].push(out);
        targets.push(codec.target_output(label)?);
    }

    // Per output bit, the samples on which it is wrong.
    let width = net.output_dim();
    let mut wrong_samples: Vec<Vec<usize>> = vec![Vec::new(); width];
    for (s, (out, target)) in acts[depth].iter().zip(&targets).enumerate() {
        for j in out.xor(target)?.ones_indices() {
            wrong_samples[j].push(s);
        }
    }
    let outputs = BitVector::from_bools(wrong_samples.iter().map(|w| w.len() >= threshold));

    let mut weights = WeightMask::empty_for(net);
    let mut nodes: Vec<BitVector> = net.layers().iter().map(|l| BitVector::zeros(l.in_dim())).collect();
    let mut wrong_out = outputs.clone();
    let all_samples: Vec<usize> = (0..b).collect();
    let planes = (usize::BITS - b.leading_zeros()) as usize;
    let mut counter = Vec::new();

    for l in (0..depth).rev() {
        let layer = &net.layers()[l];
        let n = layer.in_dim();
        let words = n.div_ceil(WORD_BITS);
        let mut incident = vec![0u32; n];
        for j in wrong_out.ones_indices() {
            let samples = if l + 1 == depth { &wrong_samples[j] } else { &all_samples };
            let row = layer.rows()[j].words();
            // Bit-sliced counters: plane k of word wi holds bit k of the
            // per-weight count for the 64 weights in that word.
            counter.clear();
            counter.resize(planes * words, 0u64);
            for &s in samples {
                let produced = acts[l + 1][s].get(j);
                let input = acts[l][s].words();
                // vote == produced  <=>  (w == x) == produced
                for (wi, (&w, &x)) in row.iter().zip(input).enumerate() {
                    let mut carry = if produced { !(w ^ x) } else { w ^ x };
                    for k in 0..planes {
                        if carry == 0 {
                            break;
                        }
                        let plane = &mut counter[k * words + wi];
                        let next = *plane & carry;
                        *plane ^= carry;
                        carry = next;
                    }
                }
            }
            let mut marked: Vec<u64> = (0..words)
                .map(|wi| at_least(&counter, words, wi, planes, threshold))
                .collect();
            if !n.is_multiple_of(WORD_BITS) {
                marked[words - 1] &= (1u64 << (n % WORD_BITS)) - 1;
            }
            let marked = BitVector::from_words(marked, n)?;
            for i in marked.ones_indices() {
                incident[i] += 1;
            }
            weights.layer_mut(l)[j] = marked;
        }
        let out_dim = layer.out_dim();
        nodes[l] = BitVector::from_bools(incident.iter().map(|&c| 2 * c as usize > out_dim));
        wrong_out = nodes[l].clone();
    }

    Ok(WrongMask {
        weights,
        nodes,
        outputs,
    })
}
