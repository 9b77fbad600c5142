//! Run configuration: flat `key = value` text, `#` starts a comment.
//!
//! ```text
//! algorithm = counting
//! layers = 784,3072,3072,3072,3072,1000
//! flip_prob = 1/100
//! schedule = 1/1000,1/50,500
//! ```
//!
//! Command-line flags are applied as the same key/value pairs after the file.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bitcore::FixedProb;
use crate::data::{DEFAULT_THRESHOLD, MNIST_PIXELS};
use crate::evolvers::{Algorithm, CosineSchedule, EvolverConfig};
use crate::network::DEFAULT_DEPTH_BOUNDS;
use crate::objective::LabelCodec;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected key = value, got {text:?}")]
    Syntax { line: usize, text: String },

    #[error("unknown config key {0:?}")]
    UnknownKey(String),

    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },

    #[error("missing {0}")]
    Missing(&'static str),

    #[error("{0}")]
    Inconsistent(String),

    #[error("cannot read config {path}: {reason}")]
    Read { path: PathBuf, reason: String },
}

pub const MNIST_CLASSES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub evolver: EvolverConfig,
    /// `[input, hidden..., output]`.
    pub sizes: Vec<usize>,
    pub classes: usize,
    pub bits_per_label: usize,
    pub seed: u64,
    pub time_budget_secs: Option<u64>,
    pub step_budget: Option<u64>,
    /// Steps between full test-split evaluations.
    pub eval_every: u64,
    /// Steps between metrics records. Test-evaluation steps and the last
    /// step are recorded as well.
    pub log_every: u64,
    pub fitness_subset_size: usize,
    pub binarize_threshold: u8,
    pub metrics_out: Option<PathBuf>,
    pub model_out: Option<PathBuf>,
    /// Worker threads; 0 picks the rayon default.
    pub threads: usize,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    /// When false, `elapsed_ms` is written as 0 so metrics files from
    /// identical runs compare byte for byte.
    pub record_elapsed: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            evolver: EvolverConfig::default(),
            sizes: vec![MNIST_PIXELS, 3072, 3072, 3072, 3072, 1000],
            classes: MNIST_CLASSES,
            bits_per_label: 100,
            seed: 0,
            time_budget_secs: Some(1800),
            step_budget: None,
            eval_every: 1000,
            log_every: 200,
            fitness_subset_size: 2000,
            binarize_threshold: DEFAULT_THRESHOLD,
            metrics_out: None,
            model_out: None,
            threads: 0,
            train_limit: None,
            test_limit: None,
            record_elapsed: true,
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| invalid(key, value, "not a non-negative integer"))
}

fn prob(key: &str, value: &str) -> Result<FixedProb, ConfigError> {
    value.parse().map_err(|e: crate::bitcore::ParseProbError| invalid(key, value, e.to_string()))
}

fn optional_budget(key: &str, value: &str) -> Result<Option<u64>, ConfigError> {
    match value {
        "" | "none" => Ok(None),
        v => num(key, v).map(Some),
    }
}

fn flag(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

/// `p_min,p_max,period` with rational probabilities.
pub fn parse_schedule(value: &str) -> Result<CosineSchedule, ConfigError> {
    let key = "schedule";
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let [lo, hi, period] = parts.as_slice() else {
        return Err(invalid(key, value, "expected p_min,p_max,period"));
    };
    CosineSchedule::new(prob(key, lo)?, prob(key, hi)?, num(key, period)?)
        .map_err(|e| invalid(key, value, e.to_string()))
}

pub fn parse_layers(value: &str) -> Result<Vec<usize>, ConfigError> {
    value
        .split(',')
        .map(|s| num::<usize>("layers", s.trim()))
        .collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            self.apply(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let e = &mut self.evolver;
        match key {
            "data_dir" => self.data_dir = Some(PathBuf::from(value)),
            "algorithm" => e.algorithm = value.parse().map_err(|r: String| invalid(key, value, r))?,
            "layers" => self.sizes = parse_layers(value)?,
            "classes" => self.classes = num(key, value)?,
            "bits_per_label" => self.bits_per_label = num(key, value)?,
            "flip_prob" => e.p = prob(key, value)?,
            "children" => e.children = num(key, value)?,
            "elite_size" => e.elite_size = num(key, value)?,
            "lambda" => e.lambda = prob(key, value)?,
            "batch_size" => e.batch_size = num(key, value)?,
            "keep_parent" => e.keep_parent = flag(key, value)?,
            "schedule" => {
                e.schedule = match value {
                    "" | "none" | "off" => None,
                    v => Some(parse_schedule(v)?),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "time_budget_secs" => self.time_budget_secs = optional_budget(key, value)?,
            "step_budget" => self.step_budget = optional_budget(key, value)?,
            "eval_every" => self.eval_every = num(key, value)?,
            "log_every" => self.log_every = num(key, value)?,
            "fitness_subset_size" => self.fitness_subset_size = num(key, value)?,
            "binarize_threshold" => self.binarize_threshold = num(key, value)?,
            "metrics_out" => self.metrics_out = Some(PathBuf::from(value)),
            "model_out" => self.model_out = Some(PathBuf::from(value)),
            "threads" => self.threads = num(key, value)?,
            "train_limit" => self.train_limit = optional_budget(key, value)?.map(|n| n as usize),
            "test_limit" => self.test_limit = optional_budget(key, value)?.map(|n| n as usize),
            "record_elapsed" => self.record_elapsed = flag(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn codec(&self) -> Result<LabelCodec, ConfigError> {
        LabelCodec::new(self.classes, self.bits_per_label)
            .map_err(|e| ConfigError::Inconsistent(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.time_budget_secs.is_none() && self.step_budget.is_none() {
            return Err(ConfigError::Inconsistent(
                "need a time budget, a step budget, or both".into(),
            ));
        }
        if self.data_dir.is_none() {
            return Err(ConfigError::Missing("data_dir"));
        }
        if self.sizes.len() < 2 || self.sizes.contains(&0) {
            return Err(ConfigError::Inconsistent(format!("bad layer widths {:?}", self.sizes)));
        }
        let codec = self.codec()?;
        let last = *self.sizes.last().unwrap();
        if last != codec.width() {
            return Err(ConfigError::Inconsistent(format!(
                "output width {last} must equal classes x bits_per_label = {}",
                codec.width()
            )));
        }
        if self.eval_every == 0 || self.log_every == 0 {
            return Err(ConfigError::Inconsistent("eval_every and log_every must be >= 1".into()));
        }
        if self.fitness_subset_size == 0 {
            return Err(ConfigError::Inconsistent("fitness_subset_size must be >= 1".into()));
        }
        self.evolver
            .validate()
            .map_err(|e| ConfigError::Inconsistent(e.to_string()))
    }

    pub fn depth_in_default_bounds(&self) -> bool {
        DEFAULT_DEPTH_BOUNDS.contains(&(self.sizes.len() - 1))
    }

    pub fn algorithm(&self) -> Algorithm {
        self.evolver.algorithm
    }
}
