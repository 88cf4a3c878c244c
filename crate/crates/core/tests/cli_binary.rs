//! Runs the `verlinde` executable as a subprocess.

use std::process::{Command, Output};

use serde_json::Value;

fn verlinde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verlinde")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli_binary");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn json_report_on_stdout() {
    let out = verlinde(&["verlinde", "--group", "A2", "--level", "2", "--genus", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "verlinde");
    assert!(report["violations"].as_array().unwrap().is_empty());
    let re = report["rows"][0]["re"].as_f64().unwrap();
    assert!((re - re.round()).abs() < 1e-9 && re > 0.0);
}

#[test]
fn csv_report_to_file() {
    let path = scratch("index.csv");
    let _ = std::fs::remove_file(&path);
    let out = verlinde(&[
        "index", "--group", "A1", "--level", "2", "--genus", "2", "--order", "3", "--format", "csv", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "command,group,level,genus,exponents,re,im,diag_residual,diag_int_defect"
    );
    assert!(lines.count() >= 1);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = |jobs: &'static str| ["verlinde", "--group", "C2", "--level", "2", "--genus", "3", "--jobs", jobs];
    let one = verlinde(&args("1"));
    let four = verlinde(&args("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn configuration_errors_exit_two_with_field_name() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"group": "A1", "level": 2, "genus": 2, "colour": "red"}"#).unwrap();
    let out = verlinde(&["verlinde", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("colour"), "{err}");

    let out = verlinde(&["verlinde", "--group", "E8", "--level", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["field"], "group");

    let out = verlinde(&["verlinde", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = verlinde(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_override() {
    let path = scratch("run.json");
    std::fs::write(&path, r#"{"group": "A1", "level": 1, "genus": 2}"#).unwrap();
    let base = verlinde(&["verlinde", "--config", path.to_str().unwrap()]);
    let over = verlinde(&["verlinde", "--config", path.to_str().unwrap(), "--level", "2"]);
    let a: Value = serde_json::from_slice(&base.stdout).unwrap();
    let b: Value = serde_json::from_slice(&over.stdout).unwrap();
    assert_eq!(a["rows"][0]["re"].as_f64(), Some(4.0));
    assert_eq!(b["rows"][0]["re"].as_f64(), Some(10.0));
}

#[test]
fn witten_rows_are_labelled_by_n() {
    let out = verlinde(&["witten", "--level", "0", "--genus", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| r["exponents"].as_str().unwrap().starts_with("n=")));
}
