//! End-to-end tests of the command-line driver.

use std::process::{Command, Output};

use mimetic_maxwell::harness::{csv_string, RunConfig, RunReport, CSV_HEADER};
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimetic-maxwell")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn mesh_info_reports_counts_and_identities() {
    let v = stdout_json(&cli(&["mesh-info", "--refine", "2"]));
    let c = &v["counts"];
    assert_eq!((c["vertices"].as_u64(), c["edges"].as_u64(), c["faces"].as_u64()), (Some(369), Some(2096), Some(3264)));
    assert_eq!(v["euler_characteristic"].as_i64(), Some(1));
    let res = v["identity_residuals"].as_array().expect("residual array");
    assert!(res.iter().all(|r| r.as_f64().unwrap() < 1e-10));
}

#[test]
fn solve_report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = cli(&["solve", "--refine", "1", "--steps", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.steps.len(), 3);
    assert!(report.err_e.is_finite() && report.err_b.is_finite());
    assert!(report.div_b_max <= 1e-10);
    let cfg = RunConfig::from_json(&report.config.to_json().unwrap()).unwrap();
    assert_eq!(cfg, report.config);
    assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&serde_json::from_str::<RunReport>(&text).unwrap()).unwrap());
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let args = ["solve", "--refine", "1", "--steps", "2", "--tau", "0.05"];
    let a = cli(&args);
    let b = cli(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seconds_per_step"].as_f64(), Some(0.0));
}

#[test]
fn free_scenario_uses_the_seed() {
    let run = |seed: &str| cli(&["--seed", seed, "solve", "--refine", "1", "--steps", "2", "--scenario", "free"]).stdout;
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
    let v: Value = serde_json::from_slice(&run("4")).unwrap();
    assert!(v["energy_drift"].as_f64().unwrap() < 1e-9);
}

#[test]
fn sweep_writes_csv_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = cli(&["--out", path.to_str().unwrap(), "sweep", "--refines", "1", "--taus", "0.2,0.1"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 2);
    assert!(dir.path().join("sweep.table.csv").exists());
    let reports: Vec<RunReport> = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(reports.len(), 2);
}

#[test]
fn empty_result_set_is_header_only() {
    assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
}

#[test]
fn check_equivalence_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq.json");
    let out = cli(&["--out", path.to_str().unwrap(), "check-equivalence", "--refine", "1", "--tau", "0.2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["passed"].as_bool(), Some(true));
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["solve", "--tau", "-1"]).status.code(), Some(2));
    let stalled = cli(&["solve", "--refine", "1", "--steps", "1", "--precond", "none", "--max-iter", "1", "--outer-tol", "1e-14"]);
    assert_eq!(stalled.status.code(), Some(1));
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(2));
}
