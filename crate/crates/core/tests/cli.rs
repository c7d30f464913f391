use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcp"))
        .args(args)
        .env_remove("QCP_LOG")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn bounds_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "n = 3\n[problem]\nomega_over_pi = 0.4\n");
    let out = qcp(&["bounds", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["N"], 3);
    assert!((v["exact"].as_f64().unwrap() - 0.190983005625).abs() < 1e-12);
    assert_eq!(v["method"], "involution");
    assert!(v["timings"]["upper_ms"].is_number());
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "n = 3\n[problem]\noverlap = 0.5\n");
    let out = qcp(&["bounds", "--config", &cfg, "--n", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "N,upper,lower,exact\n2,0.528595479209,0.500000000000,\n");
}

#[test]
fn curve_file_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "zero.csv", "p,f\n0,0\n1,0\n");
    let cfg = write(dir.path(), "run.toml", "n = 4\n[problem.curve]\nfile = \"zero.csv\"\n");
    let out = qcp(&["bounds", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["upper"].as_f64().unwrap(), 0.2);
    assert_eq!(v["lower"].as_f64().unwrap(), 0.2);
    assert!(v["exact"].is_null());
}

#[test]
fn sweep_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "[problem]\nomega_over_pi = 0.4\n");
    let dest = dir.path().join("sweep.csv");
    let out = qcp(&["sweep", "--config", &cfg, "--n-range", "1:10", "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dest).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[1], "1,0.190983005625,0.190983005625,0.190983005625");
    assert!(lines[2].starts_with("2,0.230327668542,"));
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", "n = 4\n[problem]\nomega_over_pi = 0.8\n");
    let out = qcp(&["certify", "--config", &good]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() > 10);

    // identical channels: invalid input
    let same = write(dir.path(), "same.toml", "n = 2\n[problem]\nomega_over_pi = 0.0\n");
    let out = qcp(&["certify", "--config", &same]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["status"], "error");

    // an ancilla too small for the construction is also a validation error
    let small = write(dir.path(), "small.toml", "n = 6\nd_prime = 1\n[problem]\nomega_over_pi = 0.4\n");
    let out = qcp(&["certify", "--config", &small]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.toml", "n = 2\n[problem]\noverlap = 0.5\nomega_over_pi = 0.4\n");
    assert_eq!(qcp(&["bounds", "--config", &two]).status.code(), Some(1));
    let grid = write(dir.path(), "grid.toml", "n = 2\ngrid = 10\n[problem]\noverlap = 0.5\n");
    assert_eq!(qcp(&["bounds", "--config", &grid]).status.code(), Some(1));
    assert_eq!(qcp(&["bounds", "--config", "/nonexistent/run.toml"]).status.code(), Some(1));
    let ok = write(dir.path(), "ok.toml", "[problem]\noverlap = 0.5\n");
    assert_eq!(qcp(&["simulate", "--config", &ok, "--n", "2", "--seed", "1", "--trials", "10"]).status.code(), Some(1));
}

#[test]
fn simulate_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let x = 2.0 * 0.5f64.acos() / std::f64::consts::PI;
    let cfg = write(dir.path(), "sim.toml", &format!("n = 2\nk = 0\n[problem]\nomega_over_pi = {x}\n"));
    let args = ["simulate", "--config", &cfg, "--trials", "100000", "--seed", "7"];
    let a = qcp(&args);
    let b = qcp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["rows"][0]["flagged"], false);
}

#[test]
fn round_trip_gives_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let original = "n = 5\ngrid = 5000\n[problem.curve]\nknots = [[0, 0.6], [0.3, 0.5], [0.6, 0]]\n";
    let cfg = qcp::cli::RunConfig::from_toml(original).unwrap();
    let a = write(dir.path(), "a.toml", original);
    let b = write(dir.path(), "b.toml", &cfg.to_toml().unwrap());
    let ra = strip_timings(json(&qcp(&["bounds", "--config", &a])));
    let rb = strip_timings(json(&qcp(&["bounds", "--config", &b])));
    assert_eq!(ra, rb);
}
