use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lowtw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowtw")).args(args).output().expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_embed_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("grid.gr");
    let host = dir.path().join("host.gr");
    let td = dir.path().join("host.td");
    let map = dir.path().join("host.map");
    let report = dir.path().join("embed.json");

    let out = lowtw(&["gen", "--family", "grid", "--params", "side=6,seed=4", "--out", s(&g)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar = read_json(&dir.path().join("grid.gr.json"));
    assert_eq!(sidecar["vertices"], 36);
    assert_eq!(sidecar["index_base"], 0);

    let out = lowtw(&[
        "embed", "--in", s(&g), "--eps", "0.25", "--out", s(&host), "--td", s(&td), "--map", s(&map),
        "--report", s(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    let r = read_json(&report);
    assert_eq!(r["tool"], "lowtw");
    assert_eq!(r["passed"], true);
    assert!(std::fs::metadata(&map).unwrap().len() > 0);

    let out = lowtw(&["verify", "--in", s(&host), "--td", s(&td)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = lowtw(&["report", s(&report)]);
    assert!(out.status.success());
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["all_passed"], true);
}

#[test]
fn csv_reports_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("path.gr");
    let report = dir.path().join("rspd.csv");
    assert!(lowtw(&["gen", "--family", "path", "--params", "n=20", "--out", s(&g)]).status.success());
    let out = lowtw(&["--format", "csv", "rspd", "--in", s(&g), "--report", s(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&report).unwrap().starts_with("path,value"));
    assert!(lowtw(&["report", s(&report)]).status.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Usage errors.
    assert_eq!(lowtw(&["embed"]).status.code(), Some(1));
    assert_eq!(lowtw(&["gen", "--family", "blob", "--out", s(&dir.path().join("x"))]).status.code(), Some(1));
    // Missing input.
    let missing = dir.path().join("missing.gr");
    assert_eq!(lowtw(&["rspd", "--in", s(&missing)]).status.code(), Some(1));

    let g = dir.path().join("g.gr");
    assert!(lowtw(&["gen", "--family", "grid", "--params", "side=6", "--out", s(&g)]).status.success());
    // Root out of range.
    assert_ne!(lowtw(&["rspd", "--in", s(&g), "--root", "0"]).status.code(), Some(0));
    // A decomposition that misses an edge fails validation.
    let td = dir.path().join("bad.td");
    std::fs::write(&td, "s td 1 1 2\nb 1 1\n").unwrap();
    let p = dir.path().join("p.gr");
    assert!(lowtw(&["gen", "--family", "path", "--params", "n=2", "--out", s(&p)]).status.success());
    assert_eq!(lowtw(&["verify", "--in", s(&p), "--td", s(&td)]).status.code(), Some(2));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.gr");
    assert!(lowtw(&["gen", "--family", "grid", "--params", "side=8,seed=9", "--out", s(&g)]).status.success());
    let run = |name: &str, jobs: &str| {
        let report = dir.path().join(name);
        let out = lowtw(&[
            "--seed", "5", "--jobs", jobs, "stochastic", "--in", s(&g), "--trials", "20", "--report", s(&report),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut v = read_json(&report);
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    assert_eq!(run("a.json", "1"), run("b.json", "4"));
}
