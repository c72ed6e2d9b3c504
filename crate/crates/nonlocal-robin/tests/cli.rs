//! Exercises the `nlrobin` binary: subcommands, overrides, exit codes,
//! and output files.

use std::path::Path;
use std::process::Command;

fn nlrobin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlrobin"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const GOOD: &str = r#"{
    "dim": 1,
    "s": 0.4,
    "domain": { "interior": [[0.0, 1.0]], "collar_radius": 1.0 },
    "resolution": 16,
    "exponents": {
        "p": {"kind": "constant", "value": 2.0},
        "q": {"kind": "constant", "value": 1.5},
        "r": {"kind": "constant", "value": 4.0}
    },
    "coefficients": {
        "V": {"kind": "constant", "value": 1.0},
        "beta": {"kind": "constant", "value": 0.0}
    },
    "omega0": [[0.25, 0.75]],
    "solver": {
        "tol_grad": 1e-5,
        "max_iters": 400,
        "restarts": 1,
        "ascent_iters": 4,
        "sphere_samples": 4
    },
    "seed": 7,
    "deterministic": true
}"#;

#[test]
fn validate_good_config_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "good.json", GOOD);
    let out = nlrobin().arg("validate").arg(&cfg).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("failures: 0"));
    assert!(stdout.contains("[Pass]"));
}

#[test]
fn validate_bad_s_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad_s.json", &GOOD.replace("\"s\": 0.4", "\"s\": 1.2"));
    let out = nlrobin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[Fail]"), "stdout: {stdout}");
}

#[test]
fn unknown_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unknown.json",
        &GOOD.replace("\"dim\": 1,", "\"dim\": 1, \"gamma\": 3.0,"),
    );
    let out = nlrobin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("gamma"), "stderr: {stderr}");
}

#[test]
fn solve_writes_four_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "good.json", GOOD);
    let out_dir = dir.path().join("out");
    let out = nlrobin()
        .arg("solve")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .arg("--resolution")
        .arg("12")
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}\nstderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["diagnostics.json", "solution.csv", "energy_trace.csv", "sphere_samples.csv"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    // solution CSV has the documented header
    let sol = std::fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    assert!(sol.starts_with("cell_index,x,region,value"));
    // diagnostics deserialize back into the report schema
    let text = std::fs::read_to_string(out_dir.join("diagnostics.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(report.get("runtime").is_some());
    assert!(report.get("solve").is_some());
}

#[test]
fn lambda_override_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "good.json", GOOD);
    let out_dir = dir.path().join("out");
    let out = nlrobin()
        .arg("solve")
        .arg(&cfg)
        .arg("--resolution")
        .arg("12")
        .arg("--lambda")
        .arg("0.0")
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(out_dir.join("diagnostics.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let lambda = report["solve"]["regime"]["lambda"].as_f64().unwrap();
    assert_eq!(lambda, 0.0);
}

#[test]
fn report_runs_all_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "good.json", GOOD);
    let out = nlrobin()
        .arg("report")
        .arg(&cfg)
        .arg("--resolution")
        .arg("12")
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("stages: [Validate, Check, Solve]"));
    assert!(stdout.contains("divergence theorem"));
}

#[test]
fn missing_config_exits_two() {
    let out = nlrobin().arg("validate").arg("/nonexistent/cfg.json").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_solves_reproduce_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "good.json", GOOD);
    let mut reports = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("out{run}"));
        let out = nlrobin()
            .arg("solve")
            .arg(&cfg)
            .arg("--resolution")
            .arg("12")
            .arg("--deterministic")
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        let mut report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("diagnostics.json")).unwrap())
                .unwrap();
        report.as_object_mut().unwrap().remove("runtime");
        reports.push(serde_json::to_string(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}
