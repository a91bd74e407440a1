//! End-to-end tests of the binary: exit codes, JSON shape, determinism,
//! config/flag precedence, and the --out / --log artifacts.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hessian-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary spawns")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

/// Temp path unique to this test process; callers clean up after themselves.
fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("hessian-lab-cli-{}-{name}", std::process::id()))
}

#[test]
fn passing_run_emits_one_json_document_and_exit_zero() {
    let out = run(&["mass-conservation", "--grid", "16"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["command"], "mass-conservation");
    assert_eq!(doc["verdict"], "pass");
    assert_eq!(doc["config"]["grid"], 16);
    let reports = doc["reports"].as_array().expect("reports array");
    // Two orders at two grids plus one shrink verdict per order.
    assert_eq!(reports.len(), 6);
    for rep in reports {
        assert_eq!(rep["outcome"]["kind"], "Passed");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let first = run(&["mass-conservation", "--grid", "16"]);
    let second = run(&["mass-conservation", "--grid", "16"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn tightened_tolerance_fails_with_exit_one() {
    let out = run(&["mass-conservation", "--grid", "16", "--tol-mass", "1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "fail");
    let failed = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["outcome"]["kind"] == "Failed")
        .count();
    assert!(failed > 0, "a failing run must carry at least one failed report");
}

#[test]
fn usage_and_config_errors_exit_two() {
    let out = run(&["--definitely-not-a-flag", "all"]);
    assert_eq!(out.status.code(), Some(2));

    // Odd grid side is rejected by validation before any suite runs.
    let out = run(&["capacity", "--grid", "15"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let cfg = tmp("bad.cfg");
    fs::write(&cfg, "grid = 16\nwavelength = 3\n").unwrap();
    let out = run(&["capacity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelength"));
    fs::remove_file(&cfg).ok();
}

#[test]
fn hypothesis_refusal_exits_three() {
    let out = run(&["verify-mixed", "--grid", "16", "--amp", "0.1"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "refused");
    let reason = doc["reports"][0]["outcome"]["reason"].as_str().expect("refusal reason");
    assert!(reason.contains("argument 0"), "reason: {reason}");
}

#[test]
fn flags_override_config_file_fields() {
    let cfg = tmp("override.cfg");
    fs::write(&cfg, "grid = 24\nm = 1\n").unwrap();
    let out = run(&["mass-conservation", "--config", cfg.to_str().unwrap(), "--grid", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    // The flag wins over the file; the file's m = 1 survives untouched.
    assert_eq!(doc["config"]["grid"], 16);
    assert_eq!(doc["config"]["m"], 1);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 3);
    fs::remove_file(&cfg).ok();
}

#[test]
fn out_writes_the_json_report_with_csv_and_svg_siblings() {
    let dir = tmp("artifacts");
    fs::create_dir_all(&dir).unwrap();
    let json_path = dir.join("singular.json");
    let out = run(&[
        "singular-mass",
        "--k",
        "2",
        "--eps",
        "0.1,0.05,0.025",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let written = fs::read(&json_path).unwrap();
    assert_eq!(written, out.stdout, "the JSON file mirrors stdout byte for byte");

    let csv = fs::read_to_string(dir.join("singular.csv")).unwrap();
    assert!(csv.starts_with("k,eps,h,mass_a,mass_b,ratio\n"));
    assert_eq!(csv.lines().count(), 4, "header plus one row per ladder rung");

    let svg = fs::read_to_string(dir.join("singular.svg")).unwrap();
    assert!(svg.starts_with("<svg"));

    let doc = stdout_json(&out);
    let rel = doc["reports"][0]["details"]["rel_deviation"].as_f64().unwrap();
    assert!(rel < 0.05, "finest-rung ratio sits on the cubic law, got {rel}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn log_file_collects_start_and_done_lines() {
    let log = tmp("run.log");
    fs::remove_file(&log).ok();
    let out = run(&["violation", "--k", "2", "--log", log.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&log).unwrap();
    assert!(text.contains("start violation"));
    assert!(text.contains("done violation verdict=pass"));
    fs::remove_file(&log).ok();
}
