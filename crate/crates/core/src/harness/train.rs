use std::fs;
use std::time::{Duration, Instant};

use log::{info, warn};

use super::config::RunConfig;
use super::metrics::{MetricsRecord, MetricsWriter};
use super::HarnessError;
use crate::bitcore::rng_derive;
use crate::data::{fitness_subset, make_batches, BinaryDataset, Split};
use crate::evolvers::{counting_error_step, elite_step, naive_step, Algorithm};
use crate::network::{save_network, BinaryNetwork};
use crate::objective::{evaluate_accuracy, LabelCodec, Sample, ScoredNetwork};

// Stream labels. Step `s >= 1` uses `[s]`; its children `[s, i]`.
const INIT_STREAM: u64 = 0;
const FITNESS_STREAM: u64 = u64::MAX - 1;
const BATCH_STREAM: u64 = u64::MAX;

pub struct TrainingOutcome {
    /// Best network by fitness-subset accuracy among those recorded.
    pub best: ScoredNetwork,
    pub records: Vec<MetricsRecord>,
    /// Test accuracy of `best`.
    pub test_ppm: u32,
    pub steps: u64,
}

pub struct Datasets {
    pub train: BinaryDataset,
    pub test: BinaryDataset,
}

impl Datasets {
    pub fn load(config: &RunConfig) -> Result<Self, HarnessError> {
        let dir = config
            .data_dir
            .as_deref()
            .ok_or(super::config::ConfigError::Missing("data_dir"))?;
        let mut train = BinaryDataset::load_mnist(dir, Split::Train, config.binarize_threshold)?;
        let mut test = BinaryDataset::load_mnist(dir, Split::Test, config.binarize_threshold)?;
        if let Some(n) = config.train_limit {
            train = train.truncated(n);
        }
        if let Some(n) = config.test_limit {
            test = test.truncated(n);
        }
        if train.is_empty() || test.is_empty() {
            return Err(crate::Error::EmptySamples.into());
        }
        Ok(Self { train, test })
    }
}

/// Endless sequence of shuffled training batches, reshuffled every epoch.
struct Batches {
    seed: u64,
    len: usize,
    size: usize,
    epoch: u64,
    queue: std::vec::IntoIter<Vec<usize>>,
}

impl Batches {
    fn new(seed: u64, len: usize, size: usize) -> Self {
        Self {
            seed,
            len,
            size,
            epoch: 0,
            queue: Vec::new().into_iter(),
        }
    }

    fn next_batch(&mut self) -> crate::Result<Vec<usize>> {
        loop {
            if let Some(b) = self.queue.next() {
                return Ok(b);
            }
            let mut rng = rng_derive(self.seed, &[BATCH_STREAM, self.epoch]);
            self.queue = make_batches(self.len, self.size, &mut rng)?.into_iter();
            self.epoch += 1;
        }
    }
}

enum State {
    Single(ScoredNetwork),
    Elite(Vec<ScoredNetwork>),
}

impl State {
    /// Member with the highest fitness, earliest on ties.
    fn fittest(&self) -> &ScoredNetwork {
        match self {
            State::Single(s) => s,
            State::Elite(e) => e
                .iter()
                .reduce(|a, b| if b.current_ppm > a.current_ppm { b } else { a })
                .unwrap(),
        }
    }
}

struct Budget {
    steps: Option<u64>,
    time: Option<Duration>,
}

impl Budget {
    fn exhausted(&self, steps_done: u64, elapsed: Duration) -> bool {
        self.steps.is_some_and(|s| steps_done >= s) || self.time.is_some_and(|t| elapsed >= t)
    }
}

/// Runs the configured evolver until the budget is spent, inside a thread
/// pool of `config.threads` workers.
pub fn run_training(config: &RunConfig) -> Result<TrainingOutcome, HarnessError> {
    config.validate()?;
    let data = Datasets::load(config)?;
    run_training_on(config, &data)
}

pub fn run_training_on(config: &RunConfig, data: &Datasets) -> Result<TrainingOutcome, HarnessError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    pool.install(|| train_loop(config, data))
}

fn train_loop(config: &RunConfig, data: &Datasets) -> Result<TrainingOutcome, HarnessError> {
    let codec = config.codec()?;
    if !config.depth_in_default_bounds() {
        warn!(
            "depth {} is outside the explored range {:?}",
            config.sizes.len() - 1,
            crate::network::DEFAULT_DEPTH_BOUNDS
        );
    }
    if data.train.samples[0].len() != config.sizes[0] {
        return Err(crate::Error::Dimension {
            expected: config.sizes[0],
            found: data.train.samples[0].len(),
        }
        .into());
    }

    let seed = config.seed;
    let evolver = &config.evolver;
    let subset_n = config.fitness_subset_size.min(data.train.len());
    let fit_data = fitness_subset(&data.train, subset_n, &mut rng_derive(seed, &[FITNESS_STREAM]))?;
    let fit_set = fit_data.as_samples();
    let train_set = data.train.as_samples();
    let test_set = data.test.as_samples();
    let fit_cost = fit_set.len() as u64;

    let mut metrics = MetricsWriter::create(config.metrics_out.as_deref())?;
    let mut records = Vec::new();
    let mut evaluations = 0u64;

    let founders = match evolver.algorithm {
        Algorithm::Elite => evolver.elite_size,
        _ => 1,
    };
    let mut initial = Vec::with_capacity(founders);
    for i in 0..founders {
        let net = BinaryNetwork::init_random(&mut rng_derive(seed, &[INIT_STREAM, i as u64]), &config.sizes)?;
        let fit = evaluate_accuracy(&net, &fit_set, &codec)?.ppm();
        evaluations += fit_cost;
        initial.push(ScoredNetwork::founder(net, fit));
    }
    // Highest fitness first, founders in index order on ties.
    initial.sort_by_key(|s| std::cmp::Reverse(s.current_ppm));
    let mut best = initial[0].clone();
    let mut state = match evolver.algorithm {
        Algorithm::Elite => State::Elite(initial),
        _ => State::Single(initial.swap_remove(0)),
    };
    let mut batches = Batches::new(seed, data.train.len(), evolver.batch_size);
    // Whether the counting state's fitness is known for its current network.
    let mut leader_scored = true;

    let budget = Budget {
        steps: config.step_budget,
        time: config.time_budget_secs.map(Duration::from_secs),
    };
    let start = Instant::now();
    let elapsed_ms = |at: Duration| if config.record_elapsed { at.as_millis() as u64 } else { 0 };

    let test_of = |net: &BinaryNetwork| -> crate::Result<u32> { Ok(evaluate_accuracy(net, &test_set, &codec)?.ppm()) };

    let mut step = 0u64;
    let mut now = start.elapsed();
    let mut finished = budget.exhausted(0, now);
    let first = MetricsRecord {
        step: 0,
        elapsed_ms: elapsed_ms(now),
        evaluations,
        fit_ppm: best.current_ppm,
        test_ppm: if finished { Some(test_of(&best.net)?) } else { None },
        p_threshold: evolver.p_at(0).threshold(),
    };
    metrics.write(&first)?;
    records.push(first);

    while !finished {
        step += 1;
        let p = evolver.p_at(step);
        let rng = rng_derive(seed, &[step]);
        state = match state {
            State::Single(cur) if evolver.algorithm == Algorithm::Naive => {
                evaluations += fit_cost;
                State::Single(naive_step(&cur, &rng, p, &fit_set, &codec)?)
            }
            State::Single(cur) => {
                let idx = batches.next_batch()?;
                let batch: Vec<Sample> = idx.iter().map(|&i| train_set[i]).collect();
                let out = counting_error_step(&cur.net, &rng, evolver, p, &batch, &codec)?;
                let slots = evolver.children + evolver.keep_parent as usize;
                evaluations += (1 + slots as u64) * batch.len() as u64;
                leader_scored = false;
                State::Single(ScoredNetwork::founder(out.net, 0))
            }
            State::Elite(elite) => {
                evaluations += (elite.len() * evolver.children) as u64 * fit_cost;
                State::Elite(elite_step(&elite, &rng, evolver, p, &fit_set, &codec)?)
            }
        };
        // Records carry the time the step ended, the same reading the budget saw.
        now = start.elapsed();
        finished = budget.exhausted(step, now);

        let eval_step = step.is_multiple_of(config.eval_every);
        if !step.is_multiple_of(config.log_every) && !eval_step && !finished {
            if leader_scored && state.fittest().current_ppm > best.current_ppm {
                best = state.fittest().clone();
            }
            continue;
        }
        if !leader_scored {
            if let State::Single(cur) = &mut state {
                cur.current_ppm = evaluate_accuracy(&cur.net, &fit_set, &codec)?.ppm();
                cur.lineage_ppm = cur.current_ppm;
                evaluations += fit_cost;
            }
            leader_scored = true;
        }
        let leader = state.fittest();
        if leader.current_ppm > best.current_ppm {
            best = leader.clone();
        }
        let record = if finished {
            MetricsRecord {
                step,
                elapsed_ms: elapsed_ms(now),
                evaluations,
                fit_ppm: best.current_ppm,
                test_ppm: Some(test_of(&best.net)?),
                p_threshold: p.threshold(),
            }
        } else {
            let test_ppm = if eval_step {
                let t = test_of(&leader.net)?;
                info!("step {step}: fit {} ppm, test {t} ppm", leader.current_ppm);
                Some(t)
            } else {
                None
            };
            MetricsRecord {
                step,
                elapsed_ms: elapsed_ms(now),
                evaluations,
                fit_ppm: leader.current_ppm,
                test_ppm,
                p_threshold: p.threshold(),
            }
        };
        metrics.write(&record)?;
        records.push(record);
    }

    let test_ppm = records.last().and_then(|r| r.test_ppm).unwrap_or_default();
    info!(
        "finished after {step} steps: fit {} ppm, test {test_ppm} ppm",
        best.current_ppm
    );
    if let Some(path) = &config.model_out {
        fs::write(path, save_network(&best.net))?;
    }
    Ok(TrainingOutcome {
        best,
        records,
        test_ppm,
        steps: step,
    })
}

/// Test accuracy of a saved model, with `k` inferred from the output width.
pub fn evaluate_model(
    net: &BinaryNetwork,
    test: &BinaryDataset,
    classes: usize,
) -> Result<u32, HarnessError> {
    if !net.output_dim().is_multiple_of(classes) {
        return Err(crate::Error::Dimension {
            expected: classes * (net.output_dim() / classes).max(1),
            found: net.output_dim(),
        }
        .into());
    }
    let codec = LabelCodec::new(classes, net.output_dim() / classes)?;
    Ok(evaluate_accuracy(net, &test.as_samples(), &codec)?.ppm())
}
