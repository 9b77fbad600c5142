//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use evobnn::bitcore::rng_derive;
use evobnn::data::{labels_to_bytes, IdxImages};

/// Directory holding the official MNIST files, if the environment names one.
pub fn mnist_dir() -> Option<PathBuf> {
    let dir = PathBuf::from(std::env::var_os("EVOBNN_MNIST_DIR")?);
    dir.join("train-images-idx3-ubyte").is_file().then_some(dir)
}

/// Writes a learnable stand-in for MNIST: each class lights its own band of
/// rows, with a tenth of the pixels replaced by noise.
pub fn write_synthetic_mnist(dir: &Path, train: usize, test: usize, seed: u64) {
    for (prefix, n, label) in [("train", train, 0u64), ("t10k", test, 1)] {
        let mut rng = rng_derive(seed, &[label]);
        let mut pixels = Vec::with_capacity(n * 784);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let class = rng.below(10) as usize;
            labels.push(class as u8);
            for p in 0..784 {
                let row = p / 28;
                let lit = row / 3 == class || row / 3 == (class + 3) % 10;
                let mut v = if lit { 220 } else { 10 };
                if rng.below(10) == 0 {
                    v = rng.below(256) as u8;
                }
                pixels.push(v);
            }
        }
        let images = IdxImages {
            count: n,
            rows: 28,
            cols: 28,
            pixels,
        };
        fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), images.to_bytes()).unwrap();
        fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), labels_to_bytes(&labels)).unwrap();
    }
}

/// Prints the one-line verdict for an acceptance criterion.
pub fn verdict(criterion: u32, pass: bool, detail: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {word} ({detail})");
}
