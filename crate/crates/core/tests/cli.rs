use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

const MODEL: &str = r#"
[model]
alpha = 2.0
nu = 1.0
beta = 0.5
dim = 1
"#;

const SMALL_RUN: &str = r#"
[grid]
side_length = 20.0
points = 64

[run]
dt = 0.01
horizon = 0.5
snapshots = [0.25, 0.5]
paths = 24
seed = 99
"#;

fn fracshe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracshe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fracshe(&args)
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn every_subcommand_is_listed() {
    let help = String::from_utf8(fracshe(&["--help"]).stdout).unwrap();
    for sub in [
        "kernel-test",
        "noise-test",
        "simulate",
        "moments",
        "tails",
        "compare",
        "sup-growth",
        "holder",
        "trichotomy",
        "picard-approx",
    ] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn kernel_test_reference_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "k.toml", &format!("{MODEL}\n[grid]\nside_length = 40.0\npoints = 512\n"));
    let out = dir.path().join("out");
    let o = run("kernel-test", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("kernel_test.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,spectral,closed_form,rel_err"));
    let mut rows = 0;
    for line in lines {
        let rel: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel < 1e-6, "{line}");
        rows += 1;
    }
    assert!(rows >= 10);
    assert!(!csv.contains("\r\n"));
}

#[test]
fn compare_identical_sides_has_no_violations() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", &format!("{MODEL}{SMALL_RUN}\n[compare]\ntolerance = 1e-9\n"));
    let out = dir.path().join("out");
    let o = run("compare", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("compare_summary.json"));
    assert_eq!(s["violations"], 0);
    assert_eq!(s["passed"], true);
}

#[test]
fn missing_alpha_exits_2_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let text = format!("{MODEL}{SMALL_RUN}").replace("alpha = 2.0\n", "");
    let cfg = write_config(&dir, "bad.toml", &text);
    let o = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.alpha"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_exits_2() {
    let dir = TempDir::new().unwrap();
    let text = format!("{MODEL}{SMALL_RUN}").replace("seed = 99", "seed = 99\nworkers = 4");
    let cfg = write_config(&dir, "bad.toml", &text);
    let o = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("workers"));
}

#[test]
fn unstable_step_exits_2() {
    let dir = TempDir::new().unwrap();
    let text = format!("{MODEL}{SMALL_RUN}").replace("dt = 0.01", "dt = 0.05");
    let cfg = write_config(&dir, "bad.toml", &text);
    let o = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.dt"));
}

#[test]
fn failed_audit_exits_1_with_failure_list() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{MODEL}\n[grid]\nside_length = 16.0\npoints = 64\n\n[run]\ndt = 0.01\nhorizon = 1.0\npaths = 50\nseed = 5\n\n\
         [holder]\nspace_lags = [1, 2, 3, 4]\ntime_base = 0.5\ntime_lags = [0.01, 0.02, 0.03, 0.04]\ntolerance = 0.0\n"
    );
    let cfg = write_config(&dir, "h.toml", &text);
    let out = dir.path().join("out");
    let o = run("holder", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["experiment"], "holder");
    let failures = report["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|f| f["check"].is_string() && f["detail"].is_string()));
    assert_eq!(json(&out.join("holder_summary.json"))["passed"], false);
}

#[test]
fn manifest_checksums_match_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.toml", &format!("{MODEL}{SMALL_RUN}"));
    let out = dir.path().join("out");
    let o = run("simulate", &cfg, &out, &["--paths", "5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["experiment"], "simulate");
    assert_eq!(m["master_seed"], 3);
    assert!(m["config"].as_str().unwrap().contains("paths = 5"));
    assert!(m["seed_rule"].as_str().unwrap().contains("SplitMix64"));
    let files = m["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["name"] == "simulate.csv"));
    for f in files {
        let bytes = std::fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn manifest_config_reproduces_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.toml", &format!("{MODEL}{SMALL_RUN}"));
    let first = dir.path().join("first");
    assert_eq!(run("simulate", &cfg, &first, &["--seed", "17"]).status.code(), Some(0));
    let echo = json(&first.join("manifest.json"))["config"].as_str().unwrap().to_string();
    let replay = write_config(&dir, "replay.toml", &echo);
    let second = dir.path().join("second");
    assert_eq!(run("simulate", &replay, &second, &[]).status.code(), Some(0));
    assert_eq!(
        std::fs::read(first.join("simulate.csv")).unwrap(),
        std::fs::read(second.join("simulate.csv")).unwrap()
    );
}
