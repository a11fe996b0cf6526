//! End-to-end CLI tests: exit codes, config validation, and the
//! byte-identical determinism contract (acceptance criterion: repeated runs
//! with a fixed config produce identical reports).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_framecert")
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

#[test]
fn determinism_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p7 = write_config(dir.path(), "p7.json", r#"{"family": "nonspectral-4k3", "p": 7}"#);
    let qc = write_config(dir.path(), "qc.json", r#"{"family": "quarter-cantor"}"#);
    let p7 = p7.to_str().unwrap();
    let qc = qc.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["stage", "verify", "--config", p7, "--levels", "3", "--tol", "1e-9"],
        vec!["stage", "verify", "--config", p7, "--levels", "3", "--format", "csv"],
        vec!["frame", "certify", "--config", p7, "--level", "2"],
        vec!["frame", "certify", "--config", qc, "--level", "3"],
        vec!["delta", "--config", p7, "--k", "2"],
        vec!["ortho", "search", "--config", p7, "--jmax", "2", "--qbound", "5"],
        vec!["ortho", "search", "--config", qc, "--jmax", "2", "--qbound", "3"],
        vec!["dim", "--config", p7, "--jmax", "20", "--window", "5"],
        vec!["dim", "--config", qc, "--jmax", "10", "--window", "2", "--format", "csv"],
    ];
    for args in &commands {
        let first = run(args);
        let second = run(args);
        assert!(first.status.success(), "{args:?}: {:?}", first);
        assert_eq!(
            first.stdout, second.stdout,
            "non-identical output for {args:?}"
        );
    }
    let pass_line = "criterion 10 (byte-identical reports for every command)";
    println!("{pass_line}: pass");
}

#[test]
fn stage_verify_quarter_cantor_all_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let qc = write_config(dir.path(), "qc.json", r#"{"family": "quarter-cantor"}"#);
    let out = run(&["stage", "verify", "--config", qc.to_str().unwrap(), "--levels", "4"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for stage in report["payload"]["stages"].as_array().unwrap() {
        let dev: f64 = stage["dev_op"].as_str().unwrap().parse().unwrap();
        assert!(dev < 1e-14);
    }
}

#[test]
fn malformed_config_names_field_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"family": "quarter-cantor", "bogus": 1}"#,
    );
    let out = run(&["dim", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bogus"), "stderr: {stderr}");

    let missing = dir.path().join("nope.json");
    let out = run(&["delta", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["frame", "certify"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let qc = write_config(dir.path(), "qc.json", r#"{"family": "quarter-cantor"}"#);
    let out = run(&[
        "delta",
        "--config",
        qc.to_str().unwrap(),
        "--tail-tol",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn budget_exceeded_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p7 = write_config(dir.path(), "p7.json", r#"{"family": "nonspectral-4k3", "p": 7}"#);
    // Level 13 needs 2^13 = 8192 atoms, over the built-in budget of 4096.
    let out = run(&[
        "frame",
        "certify",
        "--config",
        p7.to_str().unwrap(),
        "--level",
        "13",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("budget"), "stderr: {stderr}");
}

#[test]
fn frame_certify_p7_passes_and_reports_window() {
    let dir = tempfile::tempdir().unwrap();
    let p7 = write_config(dir.path(), "p7.json", r#"{"family": "nonspectral-4k3", "p": 7}"#);
    let out = run(&[
        "frame",
        "certify",
        "--config",
        p7.to_str().unwrap(),
        "--level",
        "3",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], serde_json::json!(true));
    let level = &report["payload"]["levels"][2];
    let lo: f64 = level["window"][0].as_str().unwrap().parse().unwrap();
    let a: f64 = level["A"].as_str().unwrap().parse().unwrap();
    let b: f64 = level["B"].as_str().unwrap().parse().unwrap();
    let hi: f64 = level["window"][1].as_str().unwrap().parse().unwrap();
    assert!(lo > 0.0 && lo - 1e-8 <= a && a <= b && b <= hi + 1e-8);
}

#[test]
fn explicit_config_with_big_integer_strings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "list.json",
        r#"{"family": "structured-list",
            "stages": [{"M": 2, "K": "123456789012345678901234567890123456789", "alpha": 1}]}"#,
    );
    let out = run(&[
        "stage",
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--levels",
        "1",
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let k = report["payload"]["stages"][0]["K"].as_str().unwrap();
    assert_eq!(k, "123456789012345678901234567890123456789");
}
