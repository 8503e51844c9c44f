//! End-to-end runs of the `ridgecert` binary: flag handling, exit
//! codes, and byte-level determinism of the emitted CSVs.

use std::path::Path;
use std::process::{Command, Output};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ridgecert::diagnostic::GradientBatch;
use ridgecert::linalg::Mat;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ridgecert"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ridgecert")
}

fn stdout(o: &Output) -> &str {
    std::str::from_utf8(&o.stdout).expect("utf8 stdout")
}

fn stderr(o: &Output) -> &str {
    std::str::from_utf8(&o.stderr).expect("utf8 stderr")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

/// Deterministic nontrivial batch: n Gaussian points with the gradients
/// of -1/2 x'Mx and mildly spread log weights.
fn sample_batch(n: usize, d: usize, seed: u64) -> GradientBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        (-2.0 * u1.max(1e-300).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let points = Mat::from_fn(n, d, |_, _| gauss());
    let grads = Mat::from_fn(n, d, |i, j| {
        -(0..d).map(|k| (1.0 + 0.3 * ((j * d + k) as f64).sin()) * points.get(i, k)).sum::<f64>()
            * if j == 0 { 1.0 } else { 0.5 }
    });
    let log_weights = (0..n).map(|i| 0.2 * ((i as f64) * 0.7).sin()).collect();
    GradientBatch::new(points, grads, log_weights).unwrap()
}

#[test]
fn curves_prints_the_csv_and_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("curves.json");
    write(&cfg, r#"{"alphas": [0.5, 1.0], "t_max": 4.0, "t_steps": 5}"#);

    let a = run(&["curves", "--config", cfg.to_str().unwrap()]);
    let b = run(&["curves", "--config", cfg.to_str().unwrap()]);
    assert!(a.status.success(), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout, "two runs of one config must agree byte for byte");

    let text = stdout(&a);
    assert!(text.starts_with("alpha,t,j_basic,j_improved,j_datafree\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 5, "header plus one row per (alpha, t)");
}

#[test]
fn out_flag_redirects_the_csv_and_keeps_the_report_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("curves.json");
    write(&cfg, r#"{"alphas": [0.75], "t_max": 2.0, "t_steps": 3}"#);
    let out = dir.path().join("table.csv");

    let piped = run(&["curves", "--config", cfg.to_str().unwrap()]);
    let filed = run(&[
        "curves",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(filed.status.success(), "stderr: {}", stderr(&filed));
    assert!(stdout(&filed).starts_with("curves:"), "report goes to stdout");
    let on_disk = std::fs::read(&out).unwrap();
    assert_eq!(on_disk, piped.stdout, "--out must write exactly the stdout CSV");
}

#[test]
fn seed_flag_is_accepted_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("oracle.json");
    write(
        &cfg,
        r#"{"d": 6, "trace": 3.0, "decay": {"kind": "exponential", "ratio": 0.8}}"#,
    );

    let a = run(&["oracle", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    let b = run(&["oracle", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    assert!(a.status.success(), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("r,tail,exact_hell2,"));
    assert_eq!(stdout(&a).lines().count(), 1 + 7, "header plus ranks 0..=d");
}

#[test]
fn usage_and_config_mistakes_exit_two() {
    let dir = tempfile::tempdir().unwrap();

    // config with a typoed key
    let typo = dir.path().join("typo.json");
    write(&typo, r#"{"alphas": [0.5], "t_max": 4.0, "t_mxa": 1.0}"#);
    let o = run(&["curves", "--config", typo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ridgecert:"), "stderr: {}", stderr(&o));

    // config file that does not exist
    let o = run(&["curves", "--config", dir.path().join("gone.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // certify with a batch neither in the config nor on the command line
    let nobatch = dir.path().join("certify.json");
    write(
        &nobatch,
        r#"{"alphas": [0.5], "families": ["basic"], "budget": {}}"#,
    );
    let o = run(&["certify", "--config", nobatch.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--batch"), "stderr: {}", stderr(&o));

    // clap-level mistakes
    let o = run(&["curves", "--config"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_treats_csv_and_binary_batches_identically() {
    let dir = tempfile::tempdir().unwrap();
    let batch = sample_batch(60, 3, 90210);

    let csv_path = dir.path().join("batch.csv");
    let bin_path = dir.path().join("batch.rcgb");
    let mut buf = Vec::new();
    batch.write_csv(&mut buf).unwrap();
    std::fs::write(&csv_path, &buf).unwrap();
    buf.clear();
    batch.write_binary(&mut buf).unwrap();
    std::fs::write(&bin_path, &buf).unwrap();

    let cfg = dir.path().join("certify.json");
    write(
        &cfg,
        r#"{"alphas": [0.5, 1.0], "families": ["basic", "improved"], "rs": [0, 1, 3], "budget": {"c1": 1.0, "c2": 1.0}}"#,
    );

    let from_csv = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--batch",
        csv_path.to_str().unwrap(),
    ]);
    let from_bin = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--batch",
        bin_path.to_str().unwrap(),
    ]);
    assert!(from_csv.status.success(), "stderr: {}", stderr(&from_csv));
    assert_eq!(
        from_csv.stdout, from_bin.stdout,
        "text and binary encodings of one batch must certify identically"
    );

    let report = stdout(&from_csv);
    assert!(report.starts_with("spectrum:"));
    assert!(report.contains("family=basic"));
    assert!(report.contains("family=improved"));
    assert_eq!(
        report.matches(" r=").count(),
        2 * 2 * 3,
        "one certificate line per (alpha, family, r)"
    );

    // the CSV mirror carries the same certificates with full precision
    let out = dir.path().join("certs.csv");
    let with_out = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--batch",
        bin_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(with_out.status.success());
    assert_eq!(with_out.stdout, from_csv.stdout, "--out must not change the report");
    let table = std::fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("alpha,family,r,tail,c_sub,bound,saturated,vacuous\n"));
    assert_eq!(table.lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn bayes_df_certifies_an_inline_forward_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bayes.json");
    write(
        &cfg,
        r#"{"a": [[1.0, 0.2, 0.0], [0.0, 0.8, 0.1]], "sigma": 1.0, "alphas": [0.75], "rs": [1, 2]}"#,
    );

    let a = run(&["bayes-df", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    let b = run(&["bayes-df", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert!(a.status.success(), "stderr: {}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("family=data_free"), "stdout: {}", stdout(&a));
}

#[test]
fn a_batch_with_no_surviving_weight_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let n = 8;
    let points = Mat::from_fn(n, 2, |i, j| (i + j) as f64 * 0.1);
    let grads = Mat::from_fn(n, 2, |i, j| ((i * 2 + j) as f64).cos());
    let batch = GradientBatch::new(points, grads, vec![f64::NEG_INFINITY; n]).unwrap();

    let path = dir.path().join("dead.rcgb");
    let mut buf = Vec::new();
    batch.write_binary(&mut buf).unwrap();
    std::fs::write(&path, &buf).unwrap();

    let cfg = dir.path().join("certify.json");
    write(
        &cfg,
        r#"{"alphas": [1.0], "families": ["basic"], "budget": {}}"#,
    );
    let o = run(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--batch",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4), "stderr: {}", stderr(&o));
    assert!(!stderr(&o).is_empty());
}
