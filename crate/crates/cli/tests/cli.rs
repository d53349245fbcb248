use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn hqe(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqe")).arg("--out").arg(out).args(args).output().unwrap()
}

fn summary(out: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn toy1d_example_meets_bound_and_writes_17_digit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = hqe(dir.path(), &["toy1d", "--L", "100", "--window", "1:2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path(), "toy1d");
    assert_eq!(s["pass"], Value::Bool(true));
    for r in s["result"]["observables"].as_array().unwrap() {
        assert!(r["variance"].as_f64().unwrap() <= r["bound"].as_f64().unwrap());
    }
    let csv = std::fs::read_to_string(dir.path().join("toy1d.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let mantissa = row[2].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{}", row[2]);
}

#[test]
fn prop33_emits_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let o = hqe(dir.path(), &["prop33", "--sigma", "0.1", "--T", "10,20,40"]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(dir.path(), "prop33");
    for key in ["I", "sigma", "T_list", "c_min", "lemmaA1_constant", "pass"] {
        assert!(s["result"].get(key).is_some(), "{key}");
    }
    assert_eq!(s["result"]["c_min"].as_array().unwrap().len(), 3);
    assert!(s["assertions"].as_array().unwrap().iter().any(|a| a["name"].as_str().unwrap().contains("frozen")));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hqe(dir.path(), &["toy1d", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(hqe(dir.path(), &["no-such-command"]).status.code(), Some(2));
    assert!(!dir.path().join("toy1d.json").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "11", "geometry-check", "--samples", "500"];
    assert_eq!(hqe(dir.path(), &args).status.code(), Some(0));
    let (j1, c1) = (std::fs::read(dir.path().join("geometry-check.json")).unwrap(), std::fs::read(dir.path().join("geometry-check.csv")).unwrap());
    assert_eq!(hqe(dir.path(), &args).status.code(), Some(0));
    assert_eq!(j1, std::fs::read(dir.path().join("geometry-check.json")).unwrap());
    assert_eq!(c1, std::fs::read(dir.path().join("geometry-check.csv")).unwrap());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().filter_map(|e| e.ok()).filter(|e| e.file_name().to_string_lossy().starts_with(".tmp")).collect();
    assert!(leftovers.is_empty());
}

#[test]
fn config_overrides_flags_and_run_record_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 9, "weight_convention": "harmonic", "parameters": {"L": 400}}"#).unwrap();
    let out = dir.path().join("a");
    let o = hqe(&out, &["--config", cfg.to_str().unwrap(), "toy1d", "--L", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read_to_string(out.join("toy1d.json")).unwrap();
    let s: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(s["run"]["parameters"]["L"], Value::from(400.0));
    assert_eq!(s["run"]["seed"], Value::from(9));
    assert_eq!(s["run"]["weight_convention"], Value::from("harmonic"));
    assert_eq!(s["provenance"]["weight_convention"], Value::from("harmonic_tanh_pi"));
    let replay = dir.path().join("replay.json");
    std::fs::write(&replay, s["run"].to_string()).unwrap();
    let o = hqe(&dir.path().join("elsewhere"), &["--config", replay.to_str().unwrap(), "toy1d"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first, std::fs::read_to_string(out.join("toy1d.json")).unwrap());
}

#[test]
fn bad_config_and_failed_computation_leave_machine_readable_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"parameters": {"nope": 1}}"#).unwrap();
    let o = hqe(dir.path(), &["--config", cfg.to_str().unwrap(), "toy1d"]);
    assert_eq!(o.status.code(), Some(2));
    let rec: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(rec["kind"], Value::from("usage"));
    std::fs::write(&cfg, r#"{"subcommand": "orbit"}"#).unwrap();
    assert_eq!(hqe(dir.path(), &["--config", cfg.to_str().unwrap(), "toy1d"]).status.code(), Some(2));
    let o = hqe(dir.path(), &["orbit", "--group", "cyclic:-1"]);
    assert_eq!(o.status.code(), Some(3));
    let rec = summary(dir.path(), "orbit");
    assert_eq!(rec["status"], Value::from("error"));
    assert_eq!(rec["kind"], Value::from("computation"));
}

#[test]
fn failed_assertion_exits_one_with_summary() {
    let dir = tempfile::tempdir().unwrap();
    // Below the first nonzero Bolza eigenvalue the window is empty, so the density ratio is 0.
    let o = hqe(dir.path(), &["weyl", "--degree", "1", "--h", "0.1", "--window", "1:1.3"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path(), "weyl");
    assert_eq!(s["pass"], Value::Bool(false));
    assert!(dir.path().join("weyl.csv").exists());
}

#[test]
fn variance_round_trips_through_exported_eigendata() {
    let dir = tempfile::tempdir().unwrap();
    let eig = dir.path().join("eig");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = hqe(&a, &["variance", "--h", "0.1", "--export-eigendata", eig.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(hqe(&b, &["variance", "--eigendata", eig.to_str().unwrap()]).status.code(), Some(0));
    let (sa, sb) = (summary(&a, "variance"), summary(&b, "variance"));
    assert_eq!(sa["result"]["variance"], sb["result"]["variance"]);
    assert_eq!(sa["provenance"]["nevo_n_provenance"], Value::from("assumed"));
    assert_eq!(sb["provenance"]["eigendata_source"], Value::from("ingested"));
    let torus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../variance/data/torus_selftest");
    assert_eq!(hqe(&b, &["variance", "--eigendata", torus.to_str().unwrap()]).status.code(), Some(3));
}
