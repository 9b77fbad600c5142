mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::write_synthetic_mnist;

fn evobnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evobnn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn train_small(dir: &Path, extra: &[&str]) -> Output {
    let model = dir.join("net.bnn");
    let mut args = vec![
        "train",
        "--data-dir",
        dir.to_str().unwrap(),
        "--layers",
        "784,16,30",
        "--bits-per-label",
        "3",
        "--step-budget",
        "5",
        "--time-budget",
        "none",
        "--fitness-subset",
        "50",
        "--model-out",
        model.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    evobnn(&args)
}

#[test]
fn train_eval_inspect() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_mnist(dir.path(), 100, 30, 1);
    let out = train_small(dir.path(), &["--flip-prob", "1/100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("steps 5 "));

    let model = dir.path().join("net.bnn");
    let eval = || {
        evobnn(&[
            "eval",
            "--model",
            model.to_str().unwrap(),
            "--data-dir",
            dir.path().to_str().unwrap(),
        ])
    };
    let (a, b) = (eval(), eval());
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let ppm: u32 = stdout(&a).trim().parse().unwrap();
    assert!(ppm <= 1_000_000);

    let inspect = evobnn(&["inspect", "--model", model.to_str().unwrap()]);
    let text = stdout(&inspect);
    assert!(text.contains("sizes 784,16,30"), "{text}");
    assert!(text.contains("layer 0: 16x784 popcount"));
    assert!(text.contains("layer 1: 30x16 popcount"));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_mnist(dir.path(), 60, 20, 2);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "data_dir = {}\nalgorithm = naive\nlayers = 784,8,10\nbits_per_label = 1\nstep_budget = 2\ntime_budget_secs = none\nfitness_subset_size = 20\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let out = evobnn(&["train", "--config", cfg.to_str().unwrap(), "--step-budget", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("steps 3 "));
}

#[test]
fn usage_errors_exit_nonzero() {
    let missing = evobnn(&["train", "--step-budget", "1"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("data_dir"));

    let dir = tempfile::tempdir().unwrap();
    write_synthetic_mnist(dir.path(), 20, 5, 3);
    for extra in [&["--flip-prob", "0.01"][..], &["--flip-prob", "3/2"], &["--algo", "sgd"], &["--schedule", "1/2,1/4,9"]] {
        let out = train_small(dir.path(), extra);
        assert!(!out.status.success(), "{extra:?} accepted");
    }
    assert!(!evobnn(&["train", "--no-such-flag"]).status.success());
    assert!(!evobnn(&["eval", "--model", "/nonexistent", "--data-dir", "/nonexistent"]).status.success());
}

#[test]
fn bench_reports_speedup() {
    let out = evobnn(&["bench", "--in-dim", "256", "--out-dim", "64", "--repetitions", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("speedup"));
    assert!(text.contains("58x"));
}
