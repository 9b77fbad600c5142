//! Packed XNOR/popcount layer against a one-byte-per-bit reference.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use crate::bitcore::{random_mask, rng_derive, BitVector, FixedProb};
use crate::network::{BinaryLayer, BinaryNetwork};

/// Inputs evaluated per timed repetition.
const INPUTS_PER_REP: usize = 16;

/// The same layer with every bit stored in its own byte.
pub struct UnpackedLayer {
    in_dim: usize,
    weights: Vec<u8>,
}

impl UnpackedLayer {
    pub fn from_packed(layer: &BinaryLayer) -> Self {
        let weights = layer
            .rows()
            .iter()
            .flat_map(|r| r.iter().map(u8::from))
            .collect();
        Self {
            in_dim: layer.in_dim(),
            weights,
        }
    }

    pub fn forward(&self, input: &[u8]) -> Vec<u8> {
        self.weights
            .chunks_exact(self.in_dim)
            .map(|row| {
                let agree = row.iter().zip(input).filter(|(w, x)| w == x).count();
                u8::from(2 * agree >= self.in_dim)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub in_dim: usize,
    pub out_dim: usize,
    pub repetitions: usize,
    /// Median nanoseconds per single-input layer forward.
    pub packed_ns: f64,
    pub unpacked_ns: f64,
}

impl BenchReport {
    pub fn packed_ops_per_sec(&self) -> f64 {
        1e9 / self.packed_ns
    }

    pub fn unpacked_ops_per_sec(&self) -> f64 {
        1e9 / self.unpacked_ns
    }

    pub fn speedup(&self) -> f64 {
        self.unpacked_ns / self.packed_ns
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "layer {}x{} ({} repetitions of {INPUTS_PER_REP} inputs)",
            self.out_dim, self.in_dim, self.repetitions
        )?;
        writeln!(
            f,
            "packed:   {:>12.0} forwards/s ({:.0} ns each)",
            self.packed_ops_per_sec(),
            self.packed_ns
        )?;
        writeln!(
            f,
            "unpacked: {:>12.0} forwards/s ({:.0} ns each)",
            self.unpacked_ops_per_sec(),
            self.unpacked_ns
        )?;
        writeln!(f, "speedup:  {:.2}x", self.speedup())?;
        write!(
            f,
            "note: the often quoted 58x figure compares binary against 32-bit float \
             convolutions; this fully-connected, bit-vs-byte comparison is a different \
             measurement and is reported only, not gated"
        )
    }
}

#[derive(Debug)]
pub struct BenchMismatch {
    pub input: usize,
}

impl fmt::Display for BenchMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "packed and unpacked outputs differ on input {}", self.input)
    }
}

impl std::error::Error for BenchMismatch {}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Times both layer implementations after checking they agree on every
/// benchmark input. `repetitions` is clamped to at least 1.
pub fn run_benchmark(in_dim: usize, out_dim: usize, repetitions: usize) -> Result<BenchReport, BenchMismatch> {
    let repetitions = repetitions.max(1);
    let net = BinaryNetwork::init_random(&mut rng_derive(0xBE7C, &[]), &[in_dim, out_dim])
        .expect("benchmark dimensions must be non-zero");
    let packed = &net.layers()[0];
    let unpacked = UnpackedLayer::from_packed(packed);

    let mut rng = rng_derive(0xBE7C, &[1]);
    let inputs: Vec<BitVector> = (0..INPUTS_PER_REP)
        .map(|_| random_mask(&mut rng, in_dim, FixedProb::HALF))
        .collect();
    let bytes: Vec<Vec<u8>> = inputs.iter().map(|x| x.iter().map(u8::from).collect()).collect();

    for (i, (x, b)) in inputs.iter().zip(&bytes).enumerate() {
        let p: Vec<u8> = packed.forward(x).unwrap().iter().map(u8::from).collect();
        if p != unpacked.forward(b) {
            return Err(BenchMismatch { input: i });
        }
    }

    let mut packed_ns = Vec::with_capacity(repetitions);
    let mut unpacked_ns = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t = Instant::now();
        for x in &inputs {
            black_box(packed.forward(black_box(x)).unwrap());
        }
        packed_ns.push(t.elapsed().as_nanos() as f64 / INPUTS_PER_REP as f64);

        let t = Instant::now();
        for b in &bytes {
            black_box(unpacked.forward(black_box(b)));
        }
        unpacked_ns.push(t.elapsed().as_nanos() as f64 / INPUTS_PER_REP as f64);
    }

    Ok(BenchReport {
        in_dim,
        out_dim,
        repetitions,
        packed_ns: median(packed_ns).max(1.0),
        unpacked_ns: median(unpacked_ns).max(1.0),
    })
}
