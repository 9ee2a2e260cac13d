//! End-to-end runs of the binary: exit codes and written files.

use std::path::Path;
use std::process::Command;

fn run(config: &str, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let cfg = out.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_modseq"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .env_remove("MODSEQ_OUT_DIR")
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

const HOLDS: &str = r#"{"name": "ok", "seed": 42, "command": "verify", "samples": 2000,
  "checks": [{"check": "clarkson_lower", "space": {"kind": "lp", "p": 3, "d": 5}}]}"#;

#[test]
fn holding_checks_exit_zero_and_write_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run(HOLDS, dir.path(), &[]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("PASS clarkson_lower"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ok.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["config"]["seed"], 42);
    let csv = std::fs::read_to_string(dir.path().join("ok.csv")).unwrap();
    assert!(csv.starts_with("campaign,check,passed,value,bound\n"));
}

#[test]
fn violated_check_exits_one() {
    // l_4 is not Hilbert, so the parallelogram law fails
    let cfg = r#"{"seed": 1, "command": "verify", "samples": 256,
      "checks": [{"check": "parallelogram", "space": {"kind": "lp", "p": 4, "d": 2}}]}"#;
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(cfg, dir.path(), &[]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL parallelogram"));
}

#[test]
fn invalid_configs_exit_two_with_the_field_named() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(r#"{"command": "jvn", "space": {"kind": "euclid", "d": 2}}"#, dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("seed"), "{stderr}");

    let cfg = r#"{"seed": 1, "command": "jvn", "budget": 0, "space": {"kind": "euclid", "d": 2}}"#;
    let (code, _, stderr) = run(cfg, dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("budget"), "{stderr}");

    let (code, _, stderr) = run(HOLDS, dir.path(), &["--jobs", "0"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("jobs"), "{stderr}");

    // a plot the campaign cannot produce
    let (code, _, stderr) = run(HOLDS, dir.path(), &["--plot", "trace"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("Trace"), "{stderr}");
}

#[test]
fn numerical_failure_exits_three() {
    // the modular overflows before a scale can be found
    let cfg = r#"{"seed": 0, "command": "norm",
      "space": {"kind": "luxemburg", "modular": {"kind": "power", "q": 4, "space": {"kind": "lp", "p": 4, "d": 1}}},
      "vectors": [[1e100]]}"#;
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(cfg, dir.path(), &[]);
    assert_eq!(code, 3, "{stderr}");

    // a contraction on E0 is still moving after the lag window
    let cfg = r#"{"seed": 0, "command": "iterate", "n_max": 6, "samples": 1,
      "map": {"kind": "embedding", "e0": {"kind": "euclid", "d": 1}, "u": [[0.9]], "h": 1},
      "x": [1.0]}"#;
    let (code, _, stderr) = run(cfg, dir.path(), &[]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn seed_flag_overrides_and_format_selects_files() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(HOLDS, dir.path(), &["--seed", "7", "--format", "json"]);
    assert_eq!(code, 0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ok.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 7);
    assert!(!dir.path().join("ok.csv").exists());
}

#[test]
fn output_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, HOLDS).unwrap();
    let out = dir.path().join("from_env");
    let status = Command::new(env!("CARGO_BIN_EXE_modseq"))
        .arg("--config")
        .arg(&cfg)
        .env("MODSEQ_OUT_DIR", &out)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(out.join("ok.json").exists());
}
