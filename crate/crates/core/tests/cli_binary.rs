use std::process::{Command, Output};

use serde_json::Value;

fn bellport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellport"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn sample_run_passes() {
    let out = bellport(&["--n", "2", "--trials", "200", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["trials_run"], 200);
    assert_eq!(r["histogram"].as_object().unwrap().len(), 16);
    assert!(r["fidelity"]["min"].as_f64().unwrap() > 1.0 - 1e-12);
}

#[test]
fn same_seed_same_report() {
    let args = ["--n", "3", "--trials", "50", "--seed", "11"];
    assert_eq!(bellport(&args).stdout, bellport(&args).stdout);
}

#[test]
fn certify_reports_mismatches_and_strict_fails() {
    let lenient = bellport(&["--mode", "certify", "--n", "2", "--trials", "10"]);
    assert_eq!(lenient.status.code(), Some(0));
    let r = report(&lenient);
    assert_eq!(r["certification"]["operator_mismatches"], 9);

    let strict = bellport(&[
        "--mode", "certify", "--n", "2", "--trials", "10", "--strict",
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn branches_mode_with_fixture_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bellport(&[
        "--mode",
        "branches",
        "--n",
        "3",
        "--input",
        "ghz",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["trials_run"], 64);
}

#[test]
fn bad_configuration_exits_with_two() {
    assert_eq!(bellport(&["--n", "6"]).status.code(), Some(2));
    assert_eq!(
        bellport(&["--mode", "certify", "--n", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bellport(&["--input", "/no/such/state"]).status.code(),
        Some(2)
    );
    assert_eq!(bellport(&["--trials", "0"]).status.code(), Some(2));
}
