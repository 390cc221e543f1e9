use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn thinbase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinbase")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn decompose_a5_is_certified() {
    let out = thinbase(&["decompose", "--group", "a5", "--x", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "decompose");
    assert_eq!(r["certified"], true);
    assert_eq!(r["result"]["oracle"], true);
    let c = &r["result"]["certificate"];
    assert!(c["x_size"].as_u64().unwrap() <= 11);
    assert!(c["y_size"].as_u64().unwrap() as f64 <= 120.0 / 11.0);
}

#[test]
fn square_root_of_z7() {
    let r = report(&thinbase(&["square-root", "--group", "z7"]));
    let s = &r["result"]["square_root"];
    assert_eq!(s["size"], 5);
    assert!((s["bound"].as_f64().unwrap() - 56f64.sqrt()).abs() < 1e-12);
}

#[test]
fn mismatched_table_is_an_error() {
    let out = thinbase(&["frobenius", "--group", "a5", "--table", "s5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn unknown_group_is_an_error() {
    assert_eq!(thinbase(&["square-root", "--group", "no-such-group"]).status.code(), Some(2));
}

#[test]
fn frobenius_without_oracle_is_uncertified() {
    let out = thinbase(&["frobenius", "--group", "a5", "--table", "a5", "--no-verify"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["verify"], false);
}

#[test]
fn perm_stats_cycle_type() {
    let r = report(&thinbase(&["perm-stats", "--cycle-type", "6,2", "--points", "8"]));
    assert!((r["result"]["stat"]["E"].as_f64().unwrap() - 5.0 / 18.0).abs() < 1e-12);
}

#[test]
fn normalized_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("run{i}.json"))).collect();
    for p in &paths {
        let out = thinbase(&["stratified", "--n", "6", "--seed", "4", "--normalize-timings", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let a = read(&paths[0]);
    assert_eq!(a, read(&paths[1]));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert!(v["elapsed_ms"].is_null());
}

#[test]
fn merge_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let tail = dir.path().join("tail.json");
    let csv = dir.path().join("tail.csv");
    let perm = dir.path().join("perm.json");
    let merged = dir.path().join("merged.json");
    let s = |p: &Path| p.to_str().unwrap().to_owned();
    let out = thinbase(&["tail-bounds", "--n", "40", "--a", "12", "--b", "15", "--out", &s(&tail), "--csv", &s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read(&csv);
    assert_eq!(rows.lines().count(), 2);
    assert!(rows.lines().nth(1).unwrap().starts_with("40,12,15,"));
    assert_eq!(thinbase(&["perm-stats", "--perm", "1,0,2", "--out", &s(&perm)]).status.code(), Some(0));
    let out = thinbase(&["report-merge", &s(&tail), &s(&perm), "--out", &s(&merged)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&read(&merged)).unwrap();
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 2);
    assert_eq!(v["certified"], true);
}

#[test]
fn merge_rejects_non_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.json");
    std::fs::write(&p, "{\"a\": 1}").unwrap();
    assert_eq!(thinbase(&["report-merge", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn csv_without_table_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.csv");
    let out = thinbase(&["square-root", "--group", "z5", "--csv", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
