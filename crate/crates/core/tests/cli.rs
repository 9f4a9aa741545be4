//! End-to-end runs of the `blockprec` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blockprec::model::adjusted_rand_index;
use blockprec::Partition;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockprec")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

/// Drops timing fields, which are the only nondeterministic output.
fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_seconds");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn bound_of_a_pair_in_one_group_is_log_two() {
    let v = json(&run(&["bound", "--dim", "2", "--lambda-d", "1", "--lambda-1", "1", "--lambda-0", "1"]));
    let b = v["log_bound"].as_f64().unwrap();
    assert!((b - 2f64.ln()).abs() < 1e-12, "{b}");
}

#[test]
fn tikhonov_on_identity_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.csv");
    fs::write(&cov, "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "estimate",
        "--cov",
        cov.to_str().unwrap(),
        "--tikhonov",
        "0.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let m = read_matrix(&out_dir.join("omega.csv"));
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { 2.0 / 3.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-12);
        }
    }
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn synthetic_data_then_search_recovers_groups() {
    let dir = tempfile::tempdir().unwrap();
    let synth_dir = dir.path().join("synth");
    let out = run(&["synth", "--groups", "3,3", "--within", "0.3", "--n", "300", "--seed", "4", "--out", synth_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(synth_dir.join("report.json")).unwrap()).unwrap();
    let planted: Partition = serde_json::from_value(report["planted"].clone()).unwrap();

    let v = json(&run(&["search", "--data", synth_dir.join("data.csv").to_str().unwrap(), "--header"]));
    let found: Partition = serde_json::from_value(v["final_partition"].clone()).unwrap();
    assert_eq!(adjusted_rand_index(&found, &planted), 1.0);
}

#[test]
fn csv_format_prints_the_first_table() {
    let out = run(&["--format", "csv", "synth", "--groups", "2", "--n", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bound", "--dim", "2", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--dim", "2", "--lambda-d", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_two() {
    // S + 0.1 I is indefinite
    let dir = tempfile::tempdir().unwrap();
    let cov = dir.path().join("cov.csv");
    fs::write(&cov, "1,2\n2,1\n").unwrap();
    let out = run(&["estimate", "--cov", cov.to_str().unwrap(), "--tikhonov", "0.1"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_is_read_and_unknown_keys_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    fs::write(&good, r#"{ "seed": 9 }"#).unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{ "sede": 9 }"#).unwrap();
    let a = json(&run(&["--config", good.to_str().unwrap(), "synth", "--groups", "2", "--n", "4"]));
    let b = json(&run(&["--seed", "9", "synth", "--groups", "2", "--n", "4"]));
    assert_eq!(a, b);
    assert_eq!(run(&["--config", bad.to_str().unwrap(), "synth", "--groups", "2"]).status.code(), Some(1));
}

#[test]
fn same_seed_same_report() {
    let args = ["--seed", "3", "sample", "--partition", "1,1,2", "--sweeps", "300", "--burn-in", "50", "--chains", "2"];
    let (mut a, mut b) = (json(&run(&args)), json(&run(&args)));
    strip_timing(&mut a);
    strip_timing(&mut b);
    assert_eq!(a, b);
    let mut c = json(&run(&["--seed", "4", "sample", "--partition", "1,1,2", "--sweeps", "300", "--burn-in", "50", "--chains", "2"]));
    strip_timing(&mut c);
    assert_ne!(a, c);
}
