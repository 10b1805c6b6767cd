use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flownav::cli::CliError;
use flownav::learn::LearnError;

fn flownav(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flownav"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = flownav(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Every pipeline except `bench`, with relative paths so two working
/// directories produce comparable files.
fn pipeline(dir: &Path) -> Vec<(String, String)> {
    ok(dir, &["gen-world", "--seed", "5", "--out", "world.txt"]);
    ok(dir, &["gen-dataset", "--worlds", "2", "--frames", "14", "--out", "data.csv", "--frames-dir", "frames"]);
    let flow = ok(dir, &["flow", "--prev", "frames/run_00/frame_000003.pgm", "--next", "frames/run_00/frame_000004.pgm"]);
    ok(dir, &["flow", "--prev", "frames/run_00/frame_000003.pgm", "--next", "frames/run_00/frame_000004.pgm", "--out", "flow.txt"]);
    for m in ["svm", "perceptron", "svr"] {
        ok(dir, &["train", "--model", m, "--data", "data.csv", "--out", &format!("{m}.model")]);
    }
    let cv = ok(dir, &["cv", "--model", "svm", "--k", "4", "--data", "data.csv", "--out", "cv.csv"]);
    ok(dir, &["cv", "--model", "svm", "--k", "4", "--jobs", "3", "--data", "data.csv", "--out", "cv_jobs.csv"]);
    ok(dir, &["cv", "--model", "svr", "--k", "4", "--data", "data.csv", "--out", "cv_svr.csv"]);
    ok(dir, &["predict", "--model-file", "svm.model", "--data", "data.csv", "--out", "pred.csv"]);
    ok(dir, &["navigate", "--world", "world.txt", "--oracle", "--max-steps", "12", "--out", "nav_oracle.csv"]);
    ok(dir, &["navigate", "--world", "world.txt", "--model-file", "svm.model", "--max-steps", "12", "--out", "nav_svm.csv"]);
    let mut files: Vec<(String, String)> = [
        "world.txt", "data.csv", "flow.txt", "svm.model", "perceptron.model", "svr.model", "cv.csv", "cv_jobs.csv",
        "cv_svr.csv", "pred.csv", "nav_oracle.csv", "nav_svm.csv",
    ]
    .iter()
    .map(|f| (f.to_string(), fs::read_to_string(dir.join(f)).unwrap()))
    .collect();
    files.push(("flow stdout".into(), flow));
    files.push(("cv stdout".into(), cv));
    files
}

#[test]
fn pipelines_are_byte_identical_across_reruns() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        assert_eq!(x, y, "{name} differs between runs");
    }
    let frames = |d: &Path| fs::read(d.join("frames/run_01/frame_000013.pgm")).unwrap();
    assert_eq!(frames(a.path()), frames(b.path()));

    let get = |n: &str| &first.iter().find(|(f, _)| f == n).unwrap().1;
    // results do not depend on the worker count; only the header differs
    let body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(get("cv.csv")), body(get("cv_jobs.csv")));
    for name in ["world.txt", "data.csv", "cv.csv", "pred.csv", "nav_oracle.csv", "svm.model", "flow.txt"] {
        assert!(get(name).contains("# flownav v1 "), "{name} lacks a provenance line");
    }
    assert!(get("data.csv").contains("seed=42"));
    let rows = get("flow.txt").lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count();
    assert_eq!(rows, 101);
    let cv_svr = get("cv_svr.csv");
    assert!(cv_svr.lines().any(|l| l.starts_with("mean,")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(flownav(d, &["--help"]).status.code(), Some(0));
    assert_eq!(flownav(d, &["--version"]).status.code(), Some(0));
    assert_eq!(flownav(d, &["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(flownav(d, &[]).status.code(), Some(1));
    assert_eq!(flownav(d, &["cv", "--model", "svm", "--data", "missing.csv"]).status.code(), Some(2));
    fs::write(d.join("bad.csv"), "not,a,dataset\n").unwrap();
    let out = flownav(d, &["train", "--model", "svm", "--data", "bad.csv", "--out", "m.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert_eq!(
        flownav(d, &["train", "--model", "svm", "--c", "-1", "--data", "bad.csv", "--out", "m.txt"]).status.code(),
        Some(1)
    );
    let numeric = CliError::from(LearnError::NonConvergence {
        iterations: 10,
        violation: 0.5,
    });
    assert_eq!(numeric.exit_code(), 3);
}

#[test]
fn in_process_entry_point_matches_binary() {
    assert_eq!(flownav::cli::main_with_args(["flownav", "--help"]), 0);
    assert_eq!(flownav::cli::main_with_args(["flownav", "navigate"]), 1);
}
