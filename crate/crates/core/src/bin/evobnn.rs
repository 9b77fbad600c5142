//! Command-line front end: train, evaluate, inspect and benchmark.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use evobnn::data::{BinaryDataset, Split};
use evobnn::harness::{evaluate_model, run_benchmark, run_training, RunConfig, MNIST_CLASSES};
use evobnn::network::load_network;

#[derive(Parser)]
#[command(name = "evobnn", version, about = "Gradient-free training of binary neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a network on MNIST until the budget runs out.
    Train(Box<TrainArgs>),
    /// Report test-split accuracy of a saved model in parts per million.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = MNIST_CLASSES)]
        classes: usize,
        #[arg(long, default_value_t = evobnn::data::DEFAULT_THRESHOLD)]
        threshold: u8,
    },
    /// Print layer sizes and per-layer weight popcounts of a saved model.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
    /// Time the packed layer against a byte-per-bit reference.
    Bench {
        #[arg(long, default_value_t = 1024)]
        in_dim: usize,
        #[arg(long, default_value_t = 1024)]
        out_dim: usize,
        #[arg(long, default_value_t = 200)]
        repetitions: usize,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Config file of `key = value` lines; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// naive, elite or counting.
    #[arg(long)]
    algo: Option<String>,
    /// Comma-separated widths, input first.
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    bits_per_label: Option<usize>,
    /// Flip probability as NUM/DEN.
    #[arg(long)]
    flip_prob: Option<String>,
    #[arg(long)]
    children: Option<usize>,
    #[arg(long)]
    elite_size: Option<usize>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    keep_parent: bool,
    /// Cosine flip schedule `p_min,p_max,period`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds, or `none`.
    #[arg(long)]
    time_budget: Option<String>,
    /// Steps, or `none`.
    #[arg(long)]
    step_budget: Option<String>,
    #[arg(long)]
    eval_every: Option<u64>,
    #[arg(long)]
    log_every: Option<u64>,
    #[arg(long)]
    fitness_subset: Option<usize>,
    #[arg(long)]
    threshold: Option<u8>,
    #[arg(long)]
    train_limit: Option<usize>,
    #[arg(long)]
    test_limit: Option<usize>,
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    threads: Option<usize>,
    /// Write 0 for elapsed_ms so reruns produce identical metrics.
    #[arg(long)]
    no_elapsed: bool,
}

impl TrainArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        [
            ("data_dir", path(&self.data_dir)),
            ("algorithm", self.algo.clone()),
            ("layers", self.layers.clone()),
            ("bits_per_label", self.bits_per_label.map(|v| v.to_string())),
            ("flip_prob", self.flip_prob.clone()),
            ("children", self.children.map(|v| v.to_string())),
            ("elite_size", self.elite_size.map(|v| v.to_string())),
            ("lambda", self.lambda.clone()),
            ("batch_size", self.batch_size.map(|v| v.to_string())),
            ("keep_parent", self.keep_parent.then(|| "true".to_string())),
            ("schedule", self.schedule.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("time_budget_secs", self.time_budget.clone()),
            ("step_budget", self.step_budget.clone()),
            ("eval_every", self.eval_every.map(|v| v.to_string())),
            ("log_every", self.log_every.map(|v| v.to_string())),
            ("fitness_subset_size", self.fitness_subset.map(|v| v.to_string())),
            ("binarize_threshold", self.threshold.map(|v| v.to_string())),
            ("train_limit", self.train_limit.map(|v| v.to_string())),
            ("test_limit", self.test_limit.map(|v| v.to_string())),
            ("metrics_out", path(&self.metrics_out)),
            ("model_out", path(&self.model_out)),
            ("threads", self.threads.map(|v| v.to_string())),
            ("record_elapsed", self.no_elapsed.then(|| "false".to_string())),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }

    fn config(&self) -> Result<RunConfig, Box<dyn std::error::Error>> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        for (k, v) in self.overrides() {
            cfg.apply(k, &v)?;
        }
        // Keep the output layer in step with k unless widths were given.
        if self.layers.is_none() && self.config.is_none() {
            if let Some(last) = cfg.sizes.last_mut() {
                *last = cfg.classes * cfg.bits_per_label;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.config()?;
            let outcome = run_training(&cfg)?;
            println!(
                "steps {} fit_ppm {} test_ppm {}",
                outcome.steps, outcome.best.current_ppm, outcome.test_ppm
            );
        }
        Command::Eval {
            model,
            data_dir,
            classes,
            threshold,
        } => {
            let net = load_network(&fs::read(&model)?)?;
            let test = BinaryDataset::load_mnist(&data_dir, Split::Test, threshold)?;
            println!("{}", evaluate_model(&net, &test, classes)?);
        }
        Command::Inspect { model } => {
            let net = load_network(&fs::read(&model)?)?;
            let sizes: Vec<String> = net.sizes().iter().map(usize::to_string).collect();
            println!("sizes {}", sizes.join(","));
            println!("weights {}", net.weight_count());
            for (i, layer) in net.layers().iter().enumerate() {
                println!(
                    "layer {i}: {}x{} popcount {}",
                    layer.out_dim(),
                    layer.in_dim(),
                    layer.popcount()
                );
            }
        }
        Command::Bench {
            in_dim,
            out_dim,
            repetitions,
        } => {
            if in_dim == 0 || out_dim == 0 {
                return Err("dimensions must be non-zero".into());
            }
            println!("{}", run_benchmark(in_dim, out_dim, repetitions)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
