use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clbc::experiments::{summarize, ScenarioSpec, Trace};

fn clbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_short(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--scenario", "case1", "--duration", "1.5", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    clbc(&args)
}

#[test]
fn run_writes_trace_summary_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_short(dir.path(), &["--controller", "eps-only", "--seed", "9"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = Trace::from_csv(&fs::read_to_string(dir.path().join("trace.csv")).unwrap()).unwrap();
    assert_eq!(trace.rows.len(), 151);
    let spec = ScenarioSpec::from_config(&fs::read_to_string(dir.path().join("scenario.cfg")).unwrap()).unwrap();
    assert_eq!(spec.seed, 9);
    assert_eq!(spec.controller.to_string(), "eps-only");
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summarize(&trace, &spec.metrics).unwrap().to_csv(), summary);
    assert_eq!(String::from_utf8_lossy(&out.stdout), summary);
}

#[test]
fn same_seed_same_bytes_and_config_replays() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_short(a.path(), &[]).status.success());
    assert!(run_short(b.path(), &[]).status.success());
    let cfg = format!("file:{}", a.path().join("scenario.cfg").display());
    assert!(clbc(&["run", "--scenario", &cfg, "--out", c.path().to_str().unwrap()]).status.success());
    let read = |d: &Path| fs::read(d.join("trace.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(read(a.path()), read(c.path()));
}

#[test]
fn overrides_reach_the_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_short(
        dir.path(),
        &["--dt", "0.002", "--noise-std", "0", "--disturbance", "sin:0.1:1:2", "--kd", "0.05"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = ScenarioSpec::from_config(&fs::read_to_string(dir.path().join("scenario.cfg")).unwrap()).unwrap();
    assert_eq!(spec.dt, 0.002);
    assert_eq!(spec.noise_std, 0.0);
    assert_eq!(spec.kd, vec![0.05; 3]);
    assert_eq!(spec.disturbance.to_string(), "sin:0.1:1:2");
}

#[test]
fn bad_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = clbc(&["run", "--scenario", "case9", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
    let out = clbc(&["run", "--scenario", "case3", "--kd", "1.5", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    let out = clbc(&["run", "--scenario", "case1", "--controller", "mre", "--out", d]);
    assert!(!out.status.success());
    let out = clbc(&["run", "--scenario", "file:/nonexistent/x.cfg", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = clbc(&[
        "run", "--scenario", "case3", "--controller", "xi-only", "--kd", "0.01", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
    let trace = Trace::from_csv(&fs::read_to_string(dir.path().join("trace.csv")).unwrap()).unwrap();
    assert!(!trace.rows.is_empty() && trace.last().unwrap().t < 30.0);
}

#[test]
fn sweep_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = clbc(&[
        "sweep", "--kd-list", "0.04:0.06:0.1", "--controllers", "clbc,eps-only", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.contains(",ok,")));
    assert!(dir.path().join("eps-only_kd0.1").join("trace.csv").exists());
}

#[test]
fn check_passes() {
    let out = clbc(&["check"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.lines().count() >= 10 && !text.contains("FAIL"));
}
