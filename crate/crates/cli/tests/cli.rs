use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use discgrp::Tolerance;
use discgrp_cli::{run, Report, RunConfig, Status, Suite};
use serde_json::Value;

fn graph(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../graphs")
        .join(format!("{name}.json"))
}

fn discgrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discgrp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str, suites: &[Suite], trials: usize) -> RunConfig {
    RunConfig {
        graph: graph(name),
        suites: suites.to_vec(),
        seed: 42,
        trials,
        tol: Tolerance::default(),
        morita_ranks: None,
        output: None,
    }
}

#[test]
fn scalar_all_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let g = graph("scalar");
    let o = discgrp(&[
        "run", "--graph", g.to_str().unwrap(), "--suite", "all", "--seed", "42", "--trials", "20",
        "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Report = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.schema, "discgrp/1");
    assert_eq!(report.status, Status::Pass);
    assert_eq!(report.suites.len(), 8);
    for s in &report.suites {
        assert!(matches!(s.status, Status::Pass | Status::Skipped), "{} {:?}", s.suite, s.status);
    }
    let summary = String::from_utf8_lossy(&o.stdout);
    assert!(summary.contains("overall: PASS"));
}

#[test]
fn source_vertex_isometry_is_hypothesis_failure() {
    let g = graph("with_source");
    let o = discgrp(&["run", "--graph", g.to_str().unwrap(), "--suite", "isometry", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["suites"][0]["status"], "hypotheses_not_met");
    assert!(report["suites"][0]["note"].as_str().unwrap().contains("source"));
}

#[test]
fn malformed_json_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"vertices\": [\"v\"],\n \"edges\": [,\n}").unwrap();
    let o = discgrp(&["run", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_are_input_errors() {
    let o = discgrp(&["run", "--graph", "/nonexistent/graph.json"]);
    assert_eq!(o.status.code(), Some(3));
    let g = graph("scalar");
    let o = discgrp(&["run", "--graph", g.to_str().unwrap(), "--suite", "nope"]);
    assert_eq!(o.status.code(), Some(3));
    let o = discgrp(&["run", "--graph", g.to_str().unwrap(), "--margin", "1.5"]);
    assert_eq!(o.status.code(), Some(3));
    let o = discgrp(&["run", "--graph", g.to_str().unwrap(), "--morita-ranks", "w=2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sample_is_deterministic() {
    let g = graph("two_vertex");
    let a = discgrp(&["sample", "--graph", g.to_str().unwrap(), "--seed", "7"]);
    let b = discgrp(&["sample", "--graph", g.to_str().unwrap(), "--seed", "7"]);
    let c = discgrp(&["sample", "--graph", g.to_str().unwrap(), "--seed", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn two_vertex_sample_has_six_parameters() {
    let g = graph("two_vertex");
    let o = discgrp(&["sample", "--graph", g.to_str().unwrap(), "--seed", "1"]);
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["parameters"], 6);
    let entries: usize = s["intertwiner"]["blocks"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_array().unwrap().len())
        .sum();
    assert_eq!(entries, 6);
    assert_eq!(s["pattern"], serde_json::json!(["v1,e1", "v2,e2"]));
}

#[test]
fn scalar_sample_is_inside_cap() {
    let g = graph("scalar");
    let o = discgrp(&["sample", "--graph", g.to_str().unwrap(), "--seed", "1"]);
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    let z = &s["intertwiner"]["blocks"]["v,e"][0];
    let modulus = z[0].as_f64().unwrap().hypot(z[1].as_f64().unwrap());
    assert!(modulus < 0.95, "{modulus}");
    assert!((modulus - s["norm"].as_f64().unwrap()).abs() < 1e-15);
}

fn strip_timing(mut r: Report) -> Report {
    for s in &mut r.suites {
        s.elapsed_ms = 0;
    }
    r
}

#[test]
fn runs_are_deterministic() {
    let cfg = config("two_vertex", &[Suite::Moebius, Suite::Pseudo, Suite::Normality, Suite::Eval], 10);
    let a = strip_timing(run(&cfg).unwrap());
    let b = strip_timing(run(&cfg).unwrap());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let mut other = cfg.clone();
    other.seed = 43;
    let c = strip_timing(run(&other).unwrap());
    assert_ne!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}

#[test]
fn every_suite_passes_on_two_vertex() {
    let mut cfg = config("two_vertex", &[Suite::All], 8);
    cfg.morita_ranks = Some([("v1".to_string(), 2), ("v2".to_string(), 1)].into());
    let report = run(&cfg).unwrap();
    for s in &report.suites {
        assert_eq!(s.status, Status::Pass, "{}: {:?}", s.suite, s.failures);
    }
    let normality = report.suites.iter().find(|s| s.suite == "normality").unwrap();
    assert_eq!(normality.witnesses[0]["kind"], "center_breaking");
    assert_eq!(report.config.morita_ranks, vec![2, 1]);
}

#[test]
fn loop_free_normality_uses_isometry_path() {
    let report = run(&config("three_cycle", &[Suite::Normality], 1)).unwrap();
    assert_eq!(report.suites[0].status, Status::Pass);
    assert_eq!(report.suites[0].witnesses[0]["kind"], "isometries_not_normal");
}

#[test]
fn failures_carry_reproducers() {
    // A tolerance far below rounding error forces residual checks to fail.
    let mut cfg = config("two_vertex", &[Suite::Pseudo], 3);
    cfg.tol = Tolerance::new(1e-300, 0.05).unwrap();
    let report = run(&cfg).unwrap();
    assert_eq!(report.exit_code(), 1);
    let s = &report.suites[0];
    assert_eq!(s.status, Status::Fail);
    assert!(!s.failures.is_empty());
    for f in &s.failures {
        assert!(!f.reproducer.inputs.is_null());
        assert_eq!(f.reproducer.seed, discgrp_cli::trial_seed(42, Suite::Pseudo, f.reproducer.trial));
    }
}
