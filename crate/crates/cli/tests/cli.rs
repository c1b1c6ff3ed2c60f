//! End-to-end runs of the `crossloop` binary: golden output, exit codes,
//! atomic artifacts and reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// A fresh, empty scratch directory.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossloop")).args(args).output().expect("binary runs")
}

fn run_config(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    let out = dir.join("out");
    let mut args = vec!["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn files_in(dir: &Path) -> Vec<String> {
    match fs::read_dir(dir) {
        Ok(entries) => {
            let mut v: Vec<String> = entries.map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
            v.sort();
            v
        }
        Err(_) => Vec::new(),
    }
}

#[test]
fn decompose_matches_the_golden_output() {
    let dir = scratch("golden");
    let config = fixture("decompose.config.json");
    let o = run(&["--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got = fs::read_to_string(dir.join("decompose.json")).unwrap();
    let want = fs::read_to_string(fixture("decompose.expected.json")).unwrap();
    assert_eq!(got, want);
    assert_eq!(files_in(&dir), vec!["decompose.json"]);
}

#[test]
fn couple_test_reports_a_tiny_total_variation() {
    let dir = scratch("couple");
    let o = run_config(&dir, r#"{"command": "couple-test", "params": {"n_max": 8}}"#, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("out/couple-test.csv")).unwrap();
    let tv: Vec<f64> = csv
        .lines()
        .filter(|l| l.starts_with("couple-tv,"))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(tv.len(), 2);
    assert!(tv.iter().all(|&v| v < 1e-4), "{tv:?}");
}

#[test]
fn malformed_json_exits_2_without_artifacts() {
    let dir = scratch("malformed");
    let o = run_config(&dir, r#"{"command": "cross", "params": {"#, &[]);
    assert_eq!(code(&o), 2);
    assert!(files_in(&dir.join("out")).is_empty());
}

#[test]
fn unknown_keys_exit_2() {
    let dir = scratch("unknown");
    let o = run_config(&dir, r#"{"command": "cross", "params": {"replicas": 10, "colour": "red"}}"#, &[]);
    assert_eq!(code(&o), 2);
    let o = run_config(&dir, r#"{"command": "cross", "verbose": true}"#, &[]);
    assert_eq!(code(&o), 2);
    assert!(files_in(&dir.join("out")).is_empty());
}

#[test]
fn configurations_with_sources_are_rejected_without_artifacts() {
    let dir = scratch("sources");
    // A single open edge leaves two vertices of odd degree.
    let o = run_config(&dir, r#"{"command": "decompose", "params": {"n": 4, "edges": [[1, 1, 2, 1]]}}"#, &[]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(files_in(&dir.join("out")).is_empty());
}

#[test]
fn conflicting_or_missing_commands_exit_2() {
    let dir = scratch("conflict");
    let o = run_config(&dir, r#"{"command": "cross"}"#, &["stability"]);
    assert_eq!(code(&o), 2);
    let o = run_config(&dir, r#"{"seed": 3}"#, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_file_exits_4() {
    let o = run(&["cross", "--config", "/nonexistent/crossloop.json"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn sample_and_explore_write_their_artifacts() {
    let dir = scratch("sample");
    let o = run_config(&dir, r#"{"command": "sample", "seed": 7, "params": {"n": 8, "samples": 2}}"#, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files = files_in(&dir.join("out"));
    assert!(files.contains(&"sample.json".to_string()), "{files:?}");
    assert!(files.iter().any(|f| f.ends_with(".svg")), "{files:?}");

    let dir = scratch("explore");
    let edges = "[[0,0,1,0],[1,0,1,1],[0,1,1,1],[0,0,0,1]]";
    let config = format!(r#"{{"command": "explore", "params": {{"n": 4, "edges": {edges}, "gamma": [1, 1, 3, 3]}}}}"#);
    let o = run_config(&dir, &config, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("out/explore.json")).unwrap()).unwrap();
    assert_eq!(doc["header"]["command"], "explore");
}

#[test]
fn csv_output_is_reproducible_across_runs_and_threads() {
    let config = r#"{"command": "cross", "seed": 11, "params": {"ns": [8], "replicas": 64}}"#;
    let read = |name: &str, threads: &str| {
        let dir = scratch(name);
        let o = run_config(&dir, config, &["--threads", threads]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.join("out/cross.csv")).unwrap()
    };
    let a = read("repro-a", "1");
    assert_eq!(a, read("repro-b", "1"));
    assert_eq!(a, read("repro-c", "4"));
}
