//! Float-free training and inference for fully binary neural networks.
//!
//! Weights and activations are single bits packed into 64-bit words. A
//! neuron fires when its weight row agrees with its input in at least half
//! of the positions (XNOR + majority vote). Networks are trained without
//! gradients by three evolutionary steps: naive perturbation, elite search,
//! and counting-error attribution. Probabilities and accuracies are fixed
//! point integers throughout the training path.

pub mod bitcore;
pub mod data;
mod error;
pub mod evolvers;
pub mod harness;
pub mod network;
pub mod objective;

pub use error::{Error, Result};
