//! Acceptance checks. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Criteria 5 to 7 need the official MNIST files: point `EVOBNN_MNIST_DIR` at
//! them. Criteria 6 and 7 train for hours, so they also need `EVOBNN_LONG=1`
//! and a release build (`cargo test --release`). Otherwise they print SKIP.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{mnist_dir, verdict, write_synthetic_mnist};
use evobnn::bitcore::{random_mask, rng_derive, BitVector, DeterministicRng, FixedProb};
use evobnn::data::{binarize, parse_idx_images, parse_idx_labels, IdxError, BinaryDataset, Split};
use evobnn::evolvers::{flip_schedule, mark_wrong, Algorithm, CosineSchedule};
use evobnn::harness::{run_benchmark, run_training, RunConfig};
use evobnn::network::{load_network, neuron_forward, save_network, BinaryLayer, BinaryNetwork};
use evobnn::objective::{blend_score, LabelCodec};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

fn bits_of(v: &BitVector) -> Vec<bool> {
    v.iter().collect()
}

#[test]
fn criterion_1_neuron_matches_sign_oracle() {
    let start = Instant::now();
    let mut rng = rng_derive(1, &[]);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for n in 1..=12usize {
        for _ in 0..50 {
            let w = random_mask(&mut rng, n, FixedProb::HALF);
            let wb = bits_of(&w);
            for code in 0u32..1 << n {
                let xb: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
                let x = BitVector::from_bools(xb.iter().copied());
                let dot: i64 = wb
                    .iter()
                    .zip(&xb)
                    .map(|(&a, &b)| (2 * a as i64 - 1) * (2 * b as i64 - 1))
                    .sum();
                if neuron_forward(&w, &x).unwrap() != (dot >= 0) {
                    mismatches += 1;
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && elapsed < Duration::from_secs(10);
    verdict(1, pass, &format!("{checked} cases, {mismatches} mismatches, {elapsed:.2?}"));
    assert!(pass);
}

/// Nested-loop reference for wrong-weight marking, on plain booleans.
struct Reference {
    weights: Vec<Vec<Vec<bool>>>,
    nodes: Vec<Vec<bool>>,
    outputs: Vec<bool>,
}

fn reference_mark(
    layers: &[Vec<Vec<bool>>],
    batch: &[(Vec<bool>, usize)],
    k: usize,
) -> Reference {
    let depth = layers.len();
    let b = batch.len();
    let threshold = b.div_ceil(2);

    // acts[s][l]: input of layer l for sample s; acts[s][depth]: output.
    let mut acts = Vec::new();
    for (x, _) in batch {
        let mut per = vec![x.clone()];
        for rows in layers {
            let input = per.last().unwrap();
            let out = rows
                .iter()
                .map(|w| {
                    let mut agree = 0;
                    for i in 0..w.len() {
                        if w[i] == input[i] {
                            agree += 1;
                        }
                    }
                    2 * agree >= w.len()
                })
                .collect();
            per.push(out);
        }
        acts.push(per);
    }

    let width = layers[depth - 1].len();
    let target = |s: usize, j: usize| j / k == batch[s].1;
    let mut outputs = vec![false; width];
    for j in 0..width {
        let mut differ = 0;
        for (s, act) in acts.iter().enumerate() {
            if act[depth][j] != target(s, j) {
                differ += 1;
            }
        }
        outputs[j] = differ >= threshold;
    }

    let mut weights: Vec<Vec<Vec<bool>>> = layers
        .iter()
        .map(|rows| rows.iter().map(|r| vec![false; r.len()]).collect())
        .collect();
    let mut nodes: Vec<Vec<bool>> = layers.iter().map(|rows| vec![false; rows[0].len()]).collect();
    let mut wrong_out = outputs.clone();
    for l in (0..depth).rev() {
        let rows = &layers[l];
        let n = rows[0].len();
        let mut incident = vec![0usize; n];
        for j in 0..rows.len() {
            if !wrong_out[j] {
                continue;
            }
            for i in 0..n {
                let mut votes = 0;
                for (s, act) in acts.iter().enumerate() {
                    let produced = act[l + 1][j];
                    let counts = if l == depth - 1 { produced != target(s, j) } else { true };
                    if !counts {
                        continue;
                    }
                    let vote = rows[j][i] == act[l][i];
                    if vote == produced {
                        votes += 1;
                    }
                }
                if votes >= threshold {
                    weights[l][j][i] = true;
                    incident[i] += 1;
                }
            }
        }
        for i in 0..n {
            nodes[l][i] = 2 * incident[i] > rows.len();
        }
        wrong_out = nodes[l].clone();
    }
    Reference {
        weights,
        nodes,
        outputs,
    }
}

fn build_net(layers: &[Vec<Vec<bool>>]) -> BinaryNetwork {
    let layers = layers
        .iter()
        .map(|rows| {
            let packed = rows.iter().map(|r| BitVector::from_bools(r.iter().copied())).collect();
            BinaryLayer::new(rows[0].len(), packed).unwrap()
        })
        .collect();
    BinaryNetwork::new(layers).unwrap()
}

fn random_bools(rng: &mut DeterministicRng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.next_u32() & 1 == 1).collect()
}

#[test]
fn criterion_2_mark_wrong_matches_reference() {
    let start = Instant::now();
    let mut rng = rng_derive(2, &[]);
    let (mut mismatches, mut marked) = (0usize, 0usize);
    for _ in 0..500 {
        let depth = 1 + rng.below(3) as usize;
        let k = 1 + rng.below(3) as usize;
        let mut sizes = vec![1 + rng.below(8) as usize];
        for _ in 1..depth {
            sizes.push(1 + rng.below(8) as usize);
        }
        sizes.push(2 * k);
        let b = 1 + rng.below(8) as usize;

        let layers: Vec<Vec<Vec<bool>>> = sizes
            .windows(2)
            .map(|w| (0..w[1]).map(|_| random_bools(&mut rng, w[0])).collect())
            .collect();
        let batch: Vec<(Vec<bool>, usize)> = (0..b)
            .map(|_| (random_bools(&mut rng, sizes[0]), rng.below(2) as usize))
            .collect();

        let net = build_net(&layers);
        let xs: Vec<BitVector> = batch.iter().map(|(x, _)| BitVector::from_bools(x.iter().copied())).collect();
        let samples: Vec<(&BitVector, usize)> = xs.iter().zip(&batch).map(|(x, (_, l))| (x, *l)).collect();
        let got = mark_wrong(&net, &samples, &LabelCodec::new(2, k).unwrap()).unwrap();
        let want = reference_mark(&layers, &batch, k);

        let mut same = bits_of(&got.outputs) == want.outputs;
        for l in 0..depth {
            same &= bits_of(&got.nodes[l]) == want.nodes[l];
            for (j, row) in got.weights.layer(l).iter().enumerate() {
                same &= bits_of(row) == want.weights[l][j];
            }
        }
        marked += got.weight_count();
        mismatches += usize::from(!same);
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && elapsed < Duration::from_secs(30);
    verdict(
        2,
        pass,
        &format!("500 instances, {mismatches} mismatches, {marked} weights marked, {elapsed:.2?}"),
    );
    assert!(pass);
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_evobnn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

/// Trains through the CLI and returns the metrics and model bytes.
fn train_bytes(data: &Path, out: &Path, algo: &str, seed: u64, threads: usize, tag: &str) -> (Vec<u8>, Vec<u8>) {
    let metrics = out.join(format!("{tag}.csv"));
    let model = out.join(format!("{tag}.bnn"));
    let seed = seed.to_string();
    let threads = threads.to_string();
    let result = run_cli(&[
        "train",
        "--data-dir",
        data.to_str().unwrap(),
        "--algo",
        algo,
        "--layers",
        "784,48,32,20",
        "--bits-per-label",
        "2",
        "--seed",
        &seed,
        "--threads",
        &threads,
        "--step-budget",
        "12",
        "--time-budget",
        "none",
        "--fitness-subset",
        "100",
        "--batch-size",
        "8",
        "--children",
        "4",
        "--elite-size",
        "2",
        "--flip-prob",
        "1/50",
        "--log-every",
        "3",
        "--eval-every",
        "6",
        "--no-elapsed",
        "--metrics-out",
        metrics.to_str().unwrap(),
        "--model-out",
        model.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    (fs::read(metrics).unwrap(), fs::read(model).unwrap())
}

#[test]
fn criterion_3_runs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_mnist(dir.path(), 300, 100, 3);
    let mut runs = 0;
    let mut differing = Vec::new();
    let jobs = [("counting", 1u64), ("counting", 2), ("counting", 3), ("elite", 1), ("naive", 1)];
    for (algo, seed) in jobs {
        let a = train_bytes(dir.path(), dir.path(), algo, seed, 1, &format!("{algo}{seed}a"));
        let b = train_bytes(dir.path(), dir.path(), algo, seed, 1, &format!("{algo}{seed}b"));
        let c = train_bytes(dir.path(), dir.path(), algo, seed, 4, &format!("{algo}{seed}c"));
        runs += 3;
        if a != b || a != c {
            differing.push(format!("{algo}/{seed}"));
        }
    }
    let pass = differing.is_empty();
    verdict(
        3,
        pass,
        &format!("{runs} runs over 3 seeds at 1 and 4 threads, differing: {differing:?}"),
    );
    assert!(pass);
}

fn float_findings(dir: &Path) -> Vec<String> {
    let float_type = regex_lite(r"f32|f64");
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        if p.is_dir() {
            stack.extend(fs::read_dir(&p).unwrap().map(|e| e.unwrap().path()));
            continue;
        }
        if p.extension().is_none_or(|e| e != "rs") {
            continue;
        }
        for (n, line) in fs::read_to_string(&p).unwrap().lines().enumerate() {
            let code = strip_strings(line);
            let code = code.split("//").next().unwrap();
            if float_type(code) || has_float_literal(code) {
                out.push(format!("{}:{}: {}", p.display(), n + 1, line.trim()));
            }
        }
    }
    out
}

/// Blanks out the contents of string literals on one line.
fn strip_strings(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let (mut inside, mut escaped) = (false, false);
    for c in line.chars() {
        if inside {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                inside = false;
                out.push(c);
            }
            continue;
        }
        if c == '"' {
            inside = true;
        }
        out.push(c);
    }
    out
}

/// Word-boundary search for any of the `|`-separated identifiers.
fn regex_lite(words: &'static str) -> impl Fn(&str) -> bool {
    move |code: &str| {
        words.split('|').any(|w| {
            code.match_indices(w).any(|(i, _)| {
                let before = code[..i].chars().next_back();
                let after = code[i + w.len()..].chars().next();
                let ident = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric() || c == '_');
                !ident(before) && !ident(after)
            })
        })
    }
}

/// Decimal literals with a fractional part or exponent, e.g. `1.5`, `2e3`, `1f32`.
fn has_float_literal(code: &str) -> bool {
    let b = code.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let starts = b[i].is_ascii_digit() && (i == 0 || !(b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_'));
        if !starts {
            i += 1;
            continue;
        }
        if b[i] == b'0' && i + 1 < b.len() && matches!(b[i + 1], b'x' | b'b' | b'o') {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            continue;
        }
        let mut j = i;
        while j < b.len() && (b[j].is_ascii_digit() || b[j] == b'_') {
            j += 1;
        }
        let fraction = j + 1 < b.len() && b[j] == b'.' && b[j + 1].is_ascii_digit();
        let exponent = j < b.len() && (b[j] == b'e' || b[j] == b'E');
        let suffix = code[j..].starts_with("f32") || code[j..].starts_with("f64");
        if fraction || exponent || suffix {
            return true;
        }
        i = j;
    }
    false
}

#[test]
fn criterion_4_training_path_is_float_free() {
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src");
    assert!(has_float_literal("let x = 1.5;") && has_float_literal("2e3") && has_float_literal("7f64"));
    assert!(!has_float_literal("0..12 0xE5 1_000 x1e3 v2.len()"));
    assert!(!has_float_literal(&strip_strings(r#"parse("0.5")"#)));

    let mut findings = Vec::new();
    for module in ["bitcore", "network", "objective", "evolvers"] {
        findings.extend(float_findings(&src.join(module)));
    }

    let mut endpoint_errors = 0;
    for (lo, hi, period) in [(1u32, 1_000_000u32, 1000u64), (0, u32::MAX, 7), (42_949_672, 85_899_345, 500), (5, 5, 3)] {
        let s = CosineSchedule::new(FixedProb::from_threshold(lo), FixedProb::from_threshold(hi), period).unwrap();
        if s.at(0).threshold() != hi || s.at(period).threshold() != lo {
            endpoint_errors += 1;
        }
        if flip_schedule(0, &s).unwrap().threshold() != hi {
            endpoint_errors += 1;
        }
    }
    let pass = findings.is_empty() && endpoint_errors == 0;
    verdict(
        4,
        pass,
        &format!("{} float findings, {endpoint_errors} inexact schedule endpoints", findings.len()),
    );
    for f in &findings {
        println!("  {f}");
    }
    assert!(pass);
}

#[test]
fn criterion_5_mnist_ingest() {
    // Fixture errors are checked on synthetic files so they run everywhere.
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_mnist(dir.path(), 20, 5, 5);
    let images = fs::read(dir.path().join("train-images-idx3-ubyte")).unwrap();
    let labels = fs::read(dir.path().join("train-labels-idx1-ubyte")).unwrap();
    let mut bad_magic = images.clone();
    bad_magic[2] ^= 0xFF;
    let mut bad_label_magic = labels.clone();
    bad_label_magic[3] = 0x03;
    let fixtures_ok = matches!(parse_idx_images(&bad_magic), Err(IdxError::BadMagic { .. }))
        && matches!(parse_idx_labels(&bad_label_magic), Err(IdxError::BadMagic { .. }))
        && matches!(parse_idx_images(&images[..images.len() - 100]), Err(IdxError::Truncated { .. }))
        && matches!(parse_idx_images(&images[..10]), Err(IdxError::Truncated { .. }))
        && matches!(parse_idx_labels(&labels[..labels.len() - 1]), Err(IdxError::Truncated { .. }));

    assert!(fixtures_ok, "corrupted fixtures were accepted");
    let Some(mnist) = mnist_dir() else {
        println!("criterion 5: SKIP (corrupted fixtures rejected; set EVOBNN_MNIST_DIR to check the official files)");
        return;
    };
    let train = BinaryDataset::load_mnist(&mnist, Split::Train, 128).unwrap();
    let test = BinaryDataset::load_mnist(&mnist, Split::Test, 128).unwrap();
    let shapes_ok = train.samples.iter().chain(&test.samples).all(|x| x.len() == 784);
    let pass = fixtures_ok && shapes_ok && train.len() == 60_000 && test.len() == 10_000;
    verdict(
        5,
        pass,
        &format!("train {} test {}, corrupted fixtures rejected: {fixtures_ok}", train.len(), test.len()),
    );
    assert!(pass);
}

struct Bounds {
    counting_min: u32,
    elite_min: u32,
    naive_max: u32,
}

/// Runs all three trainers on three seeds and applies the two-of-three rule.
fn reproduction(criterion: u32, budget_secs: u64, limits: Option<(usize, usize)>, bounds: Bounds) {
    let long = std::env::var("EVOBNN_LONG").is_ok_and(|v| v == "1");
    let Some(mnist) = mnist_dir().filter(|_| long && !cfg!(debug_assertions)) else {
        println!("criterion {criterion}: SKIP (needs EVOBNN_MNIST_DIR, EVOBNN_LONG=1 and a --release build)");
        return;
    };
    let seeds = [1u64, 2, 3];
    let mut results = Vec::new();
    for seed in seeds {
        let mut row = Vec::new();
        for algo in [Algorithm::Counting, Algorithm::Elite, Algorithm::Naive] {
            let mut cfg = RunConfig {
                data_dir: Some(mnist.clone()),
                ..RunConfig::default()
            };
            cfg.evolver.algorithm = algo;
            cfg.seed = seed;
            cfg.time_budget_secs = Some(budget_secs);
            if let Some((train, test)) = limits {
                cfg.train_limit = Some(train);
                cfg.test_limit = Some(test);
            }
            let outcome = run_training(&cfg).unwrap();
            println!(
                "  criterion {criterion} seed {seed} {algo}: test {} ppm after {} steps",
                outcome.test_ppm, outcome.steps
            );
            row.push(outcome.test_ppm);
        }
        results.push(row);
    }
    let count = |f: &dyn Fn(&Vec<u32>) -> bool| results.iter().filter(|r| f(r)).count();
    let counting = count(&|r| r[0] >= bounds.counting_min);
    let elite = count(&|r| r[1] >= bounds.elite_min);
    let naive = count(&|r| r[2] <= bounds.naive_max);
    let ordered = count(&|r| r[0] > r[1] && r[1] > r[2]);
    let pass = counting >= 2 && elite >= 2 && naive >= 2 && ordered >= 2;
    verdict(
        criterion,
        pass,
        &format!(
            "seeds meeting bound: counting {counting}/3, elite {elite}/3, naive {naive}/3, ordering {ordered}/3; ppm {results:?}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_full_mnist_thirty_minutes() {
    reproduction(
        6,
        1800,
        None,
        Bounds {
            counting_min: 500_000,
            elite_min: 380_000,
            naive_max: 200_000,
        },
    );
}

#[test]
fn criterion_7_subset_ten_minutes() {
    reproduction(
        7,
        600,
        Some((8000, 2000)),
        Bounds {
            counting_min: 400_000,
            elite_min: 250_000,
            naive_max: 200_000,
        },
    );
}

#[test]
fn criterion_8_packed_layer_speedup() {
    let report = run_benchmark(1024, 1024, 30).unwrap();
    println!("{report}");
    let pass = report.speedup() >= 4.0 && report.to_string().contains("58x");
    verdict(8, pass, &format!("speedup {:.2}x, required 4x", report.speedup()));
    assert!(pass);
}

fn net_strategy() -> impl Strategy<Value = BinaryNetwork> {
    (any::<u64>(), proptest::collection::vec(1usize..70, 2..5))
        .prop_map(|(seed, sizes)| BinaryNetwork::init_random(&mut rng_derive(seed, &[]), &sizes).unwrap())
}

#[test]
fn criterion_9_property_suites() {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(256)
    });
    let mut failures = Vec::new();
    let mut check = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    check(
        "serialization round trip",
        runner
            .run(&net_strategy(), |net| {
                prop_assert_eq!(load_network(&save_network(&net)).unwrap(), net);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "majority and popcount identities",
        runner
            .run(&(any::<u64>(), 1usize..600), |(seed, n)| {
                let a = random_mask(&mut rng_derive(seed, &[0]), n, FixedProb::HALF);
                let b = random_mask(&mut rng_derive(seed, &[1]), n, FixedProb::HALF);
                let slow = a.iter().filter(|&x| x).count();
                prop_assert_eq!(a.popcount(), slow);
                prop_assert_eq!(a.xnor(&b).unwrap().popcount() + a.xor(&b).unwrap().popcount(), n);
                prop_assert_eq!(a.majority_bit().unwrap(), 2 * slow >= n);
                prop_assert_eq!(a.complement().popcount(), n - slow);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "binarize monotone in threshold",
        runner
            .run(&(proptest::collection::vec(any::<u8>(), 0..800), any::<u8>(), any::<u8>()), |(px, t1, t2)| {
                let (lo, hi) = (t1.min(t2), t1.max(t2));
                let a = binarize(&px, lo);
                let b = binarize(&px, hi);
                prop_assert!(b.iter().zip(a.iter()).all(|(h, l)| !h || l));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "blend_score convex bounds",
        runner
            .run(&(0u32..=1_000_000, 0u32..=1_000_000, any::<u32>()), |(cur, anc, lam)| {
                let s = blend_score(cur, anc, FixedProb::from_threshold(lam));
                prop_assert!(s >= cur.min(anc) && s <= cur.max(anc));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "schedule monotone within a period",
        runner
            .run(&(any::<u32>(), any::<u32>(), 1u64..5000), |(a, b, period)| {
                let s = CosineSchedule::new(
                    FixedProb::from_threshold(a.min(b)),
                    FixedProb::from_threshold(a.max(b)),
                    period,
                )
                .unwrap();
                let mut prev = s.at(0).threshold();
                let stride = (period / 200).max(1);
                let mut t = 0;
                while t <= period {
                    let cur = s.at(t).threshold();
                    prop_assert!(cur <= prev);
                    prev = cur;
                    t += stride;
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(120);
    verdict(9, pass, &format!("5 suites x 256 cases, {} failing, {elapsed:.2?}", failures.len()));
    for f in &failures {
        println!("  {f}");
    }
    assert!(pass);
}
