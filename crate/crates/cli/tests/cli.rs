use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-stable"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn assert_reproducible(args: &[&str]) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut one = vec!["--workers", "1"];
    one.extend_from_slice(args);
    let mut two = vec!["--workers", "3"];
    two.extend_from_slice(args);
    assert!(run(a.path(), &one).status.success());
    assert!(run(b.path(), &two).status.success());
    let fa = files(a.path());
    assert!(!fa.is_empty());
    assert_eq!(fa, files(b.path()), "{args:?}");
}

#[test]
fn sampling_is_byte_reproducible_across_worker_counts() {
    assert_reproducible(&["--seed", "11", "sample", "-N", "20", "-M", "3", "-T", "2"]);
}

#[test]
fn sde_is_byte_reproducible() {
    assert_reproducible(&[
        "--seed", "5", "sde", "--b", "piecewise:0@0=1;default=2", "-N", "200", "-M", "2", "--window-lo", "-24",
        "--window-hi", "24", "--write-paths", "3",
    ]);
}

#[test]
fn analytic_and_increment_tables_are_reproducible() {
    assert_reproducible(&["analytic", "-p", "3", "-a", "1.5"]);
    assert_reproducible(&["--seed", "2", "increment-dist", "--draws", "25000"]);
}

#[test]
fn sampled_path_files_round_trip_through_integrate() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--seed", "3", "sample", "-N", "2", "-M", "2"]).status.success());
    let file = dir.path().join("paths/path_000001.txt");
    let text = fs::read_to_string(&file).unwrap();
    let record = padic_stable::pathfile::PathRecord::parse(&text).unwrap();
    assert_eq!(record.to_text(), text);
    let out = run(dir.path(), &["integrate", "--path", file.to_str().unwrap(), "--integrand", "const:1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // integrating the constant 1 gives back the path itself
    let path = record.into_path().unwrap();
    let csv = fs::read_to_string(dir.path().join("integrate.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let mut cols = line.split(',');
        let t: f64 = cols.next().unwrap().parse().unwrap();
        assert_eq!(cols.next().unwrap(), path.value_at(t).to_string());
    }
}

#[test]
fn reports_carry_the_config_hash() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(a.path(), &["--seed", "1", "check-h", "--b", "radial:1,0,0.3"]).status.success());
    assert!(run(b.path(), &["--seed", "2", "check-h", "--b", "radial:1,0,0.3"]).status.success());
    let read = |d: &Path| -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(d.join("check_h.json")).unwrap()).unwrap()
    };
    let (ra, rb) = (read(a.path()), read(b.path()));
    let hash = ra["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_ne!(hash, rb["config_hash"].as_str().unwrap());
    assert!(ra["truncation"].is_object());
    assert_eq!(ra["result"]["finite"], true);
}

#[test]
fn localtime_splits_the_horizon_between_grid_and_outside() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--seed", "1", "localtime", "-a", "1.5", "-M", "6", "-n", "3", "--big-n", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("localtime.json")).unwrap()).unwrap();
    let inside = report["result"]["time_inside_grid"].as_f64().unwrap();
    let outside = report["result"]["time_outside_grid"].as_f64().unwrap();
    assert!((inside + outside - 1.0).abs() < 1e-9);
}

#[test]
fn configuration_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    assert_eq!(code(&["sample", "-p", "6"]), Some(2));
    assert_eq!(code(&["localtime", "-a", "0.9"]), Some(3));
    assert_eq!(code(&["sde", "-a", "1", "--b", "const:1"]), Some(3));
    assert_eq!(code(&["sample", "-M", "40"]), Some(4));
    assert_eq!(code(&["integrate", "--path", "/nonexistent/path.txt", "--integrand", "const:1"]), Some(5));
    assert_eq!(code(&["sample", "--no-such-flag"]), Some(64));
}
