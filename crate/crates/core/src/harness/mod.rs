//! Training runs, metrics, benchmarking and the pieces of the CLI.

mod bench;
mod config;
mod metrics;
mod train;

use thiserror::Error;

pub use bench::{run_benchmark, BenchMismatch, BenchReport, UnpackedLayer};
pub use config::{parse_layers, parse_schedule, ConfigError, RunConfig, MNIST_CLASSES};
pub use metrics::{read_metrics, MetricsRecord, MetricsWriter, HEADER as METRICS_HEADER};
pub use train::{evaluate_model, run_training, run_training_on, Datasets, TrainingOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Core(#[from] crate::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
}

impl From<crate::data::IdxError> for HarnessError {
    fn from(e: crate::data::IdxError) -> Self {
        HarnessError::Core(e.into())
    }
}
