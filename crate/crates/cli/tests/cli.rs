use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_margin-rates"))
}

fn run_with(sub: &str, cfg: Option<Value>, dir: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg(sub).arg("--out").arg(dir.join("out"));
    if let Some(cfg) = cfg {
        let p = dir.join("cfg.json");
        std::fs::write(&p, cfg.to_string()).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.args(extra).output().unwrap()
}

fn summary(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out").join(format!("{name}_summary.json"))).unwrap()).unwrap()
}

#[test]
fn margin_check_passes_and_writes_contract_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("margin-check", Some(json!({"mc_budget": 20000})), dir.path(), &["--svg", "margin.svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "margin-check");
    for k in ["pass", "theoretical", "measured", "tolerance"] {
        assert!(s.get(k).is_some(), "missing {k}");
    }
    let svg = std::fs::read_to_string(dir.path().join("out/margin.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let csv = std::fs::read_to_string(dir.path().join("out/margin-check.csv")).unwrap();
    assert!(csv.starts_with("experiment,t,draws,empirical,closed_form,se,envelope\r\n"));
}

#[test]
fn result_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"n_grid": [64, 128, 256], "replicates": 2, "mc_budget": 128});
    let out = run_with("rates", Some(cfg), dir.path(), &[]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    let csv = std::fs::read_to_string(dir.path().join("out/rates.csv")).unwrap();
    let mut lines = csv.split("\r\n");
    assert_eq!(lines.next(), Some("experiment,n,replicate,seed,excess,se,wall_ms"));
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.starts_with("rates,") && r.ends_with(",0")));
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"n_grid": [64, 128, 256], "replicates": 3, "mc_budget": 128});
    let mut csvs = vec![];
    for w in ["1", "3"] {
        let out = run_with("sieve-vs-plugin", Some(cfg.clone()), dir.path(), &["--workers", w]);
        assert!(matches!(out.status.code(), Some(0) | Some(3)));
        csvs.push(std::fs::read(dir.path().join("out/sieve-vs-plugin.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn seed_flag_changes_the_draws() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"replicates": 2});
    let mut csvs = vec![];
    for seed in ["1", "2"] {
        run_with("lower-bound", Some(cfg.clone()), dir.path(), &["--seed", seed]);
        csvs.push(std::fs::read(dir.path().join("out/lower-bound.csv")).unwrap());
    }
    assert_ne!(csvs[0], csvs[1]);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("rates", json!({"experiment": "corridor"})),
        ("rates", json!({"replicates": 0})),
        ("rates", json!({"unknown_key": 1})),
        ("concentration", json!({"replicates": 99})),
        ("corridor", json!({"estimator": {"bandwidth": {"rule": "holder", "scale": 1.0}}})),
        ("sieve-vs-plugin", json!({"distribution": {"kind": "ball", "d": 1, "C": 0.5}})),
        ("lower-bound", json!({"distribution": {"kind": "hypercube", "d": 1, "q": 8, "m": 5, "w": 0.1, "beta": 1.0}})),
        ("margin-check", json!({"distribution": {"kind": "hypercube", "d": 2, "q": 2, "m": 5, "w": 0.1, "beta": 1.0}})),
    ];
    for (sub, cfg) in cases {
        let out = run_with(sub, Some(cfg.clone()), dir.path(), &[]);
        assert_eq!(out.status.code(), Some(2), "{sub} {cfg}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin().args(["rates", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    // A threshold of zero cannot be met while the excess is still positive at the largest n.
    let cfg = json!({"n_grid": [64, 128, 256], "replicates": 2, "mc_budget": 128, "tolerance": {"excess": 0.0},
                     "estimator": {"bandwidth": {"rule": "fixed", "h": 0.01}}});
    let out = run_with("corridor", Some(cfg), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary(dir.path(), "corridor")["pass"], false);
}

#[test]
fn print_config_shows_defaults() {
    let out = bin().args(["lower-bound", "--print-config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let cfg: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cfg["experiment"], "lower-bound");
    assert_eq!(cfg["n_grid"], json!([25]));
}
