//! The `mems-lab` binary: artifacts, exit codes and config handling.

use std::path::Path;
use std::process::{Command, Output};

use mems_lab::gelfand::BifurcationDiagram;
use mems_lab::io::{read_json, read_profile_csv};
use mems_lab::theorems::TheoremReport;

fn mems_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mems-lab")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_a_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let run = mems_lab(&["solve", "--n", "3", "--family", "mems", "--m", "0.7", "--out", path_str(&out)]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("r,u,ur\n"));
    let nodes = read_profile_csv(text.as_bytes()).unwrap();
    assert_eq!(nodes.last().unwrap().r, 1.0);
    assert!(String::from_utf8_lossy(&run.stdout).contains("lambda="));
}

#[test]
fn solve_at_lambda_lands_on_the_minimal_branch() {
    let run = mems_lab(&["solve", "--n", "2", "--family", "mems", "--lambda", "0.5", "--format", "json"]);
    assert_eq!(run.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert!((value["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(value["m"].as_f64().unwrap() < 0.44);
}

#[test]
fn gamma_prints_the_estimate() {
    let run = mems_lab(&["gamma", "--family", "power", "--p", "2"]);
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "1.5");
}

#[test]
fn sweep_json_is_a_diagram() {
    let run = mems_lab(&["sweep", "--n", "2", "--family", "mems", "--points", "40", "--workers", "2", "--format", "json"]);
    assert_eq!(run.status.code(), Some(0));
    let diagram: BifurcationDiagram = read_json(run.stdout.as_slice()).unwrap();
    assert_eq!(diagram.records.len(), 40);
    assert!(diagram.m_fold.is_some());
}

#[test]
fn stability_and_examples_emit_csv() {
    let run = mems_lab(&["stability", "--n", "2", "--family", "mems", "--m", "0.3", "--format", "csv"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(run.stdout.starts_with(b"mu,first_zero\n"));
    let run = mems_lab(&["examples", "--format", "csv"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(run.stdout.starts_with(b"kind,n,p,"));
}

#[test]
fn verify_over_an_extended_range_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let run = mems_lab(&["verify", "--suite", "all", "--n-range", "2..8", "--out", path_str(&out)]);
    let report: TheoremReport = read_json(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(run.status.code(), Some(if report.accepted() { 0 } else { 1 }));
    assert_eq!(report.settings.n_range, (2, 8));
    assert_eq!(report.summary.failed, 0);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["solve", "--n", "3", "--family", "mems"][..],
        &["solve", "--n", "3", "--family", "mems", "--m", "0.5", "--lambda", "1"],
        &["sweep", "--n", "2", "--family", "nope"],
        &["verify", "--suite", "everything"],
        &["frobnicate"],
        &[],
    ] {
        let run = mems_lab(args);
        assert_eq!(run.status.code(), Some(2), "{args:?}");
        assert!(!run.stderr.is_empty());
    }
}

#[test]
fn computation_errors_exit_with_one_and_name_the_error() {
    let run = mems_lab(&["solve", "--n", "2", "--family", "mems", "--lambda", "5"]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("NotBracketed"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"command": "solve", "n": 3, "family": "mems", "m": 0.2, "format": "json"}"#).unwrap();

    let from_file = mems_lab(&["--config", path_str(&config)]);
    assert_eq!(from_file.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(value["m"].as_f64(), Some(0.2));

    let overridden = mems_lab(&["solve", "--m", "0.6", "--config", path_str(&config)]);
    let value: serde_json::Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!((value["m"].as_f64(), value["n"].as_u64()), (Some(0.6), Some(3)));

    std::fs::write(&config, r#"{"command": "solve", "n": 3, "colour": "blue"}"#).unwrap();
    assert_eq!(mems_lab(&["--config", path_str(&config)]).status.code(), Some(2));
    assert_eq!(mems_lab(&["sweep", "--config", path_str(&config)]).status.code(), Some(2));
}

#[test]
fn seed_variable_changes_nothing() {
    let args = ["sweep", "--n", "3", "--family", "power:1:1", "--points", "16"];
    let plain = mems_lab(&args);
    let seeded = Command::new(env!("CARGO_BIN_EXE_mems-lab"))
        .args(args)
        .env("MEMS_LAB_SEED", "12345")
        .output()
        .unwrap();
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(plain.stdout, seeded.stdout);
}
