use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monothresh"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "status {:?}, stderr {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const MAJ3: &str = r#"{"n": 3, "minimal_sets": [[0,1],[0,2],[1,2]]}"#;
const TRIANGLE4: &str = r#"{"vertices": 4, "edges": [[0,1],[1,2],[0,2]]}"#;

#[test]
fn analyze_majority_row() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "maj3.json", MAJ3);
    let out = run(&["analyze", p(&f), "--p", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "p,m,dm_dp,influence,iso_gap,optimality_ratio\n0.5,0.5,1.5,1.5,0.25,1.5\n"
    );
}

#[test]
fn analyze_subcube_is_tight() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sub.json", r#"{"n": 4, "minimal_sets": [[0,1]]}"#);
    let rows = json(&run(&["analyze", p(&f), "--p", "0.3", "--json"]));
    assert!(rows[0]["iso_gap"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn analyze_default_grid() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "maj3.json", MAJ3);
    let out = run(&["analyze", p(&f)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 20);
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", "{\"n\": 3,\n \"minimal_sets\": [[0,1]");
    let out = run(&["pc", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn validation_error_reports_field() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"n": 3, "minimal_sets": [[0,7]]}"#);
    let out = run(&["q", p(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("minimal_sets[0][1]"));
}

#[test]
fn cap_violation_exits_3() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "wide.json", r#"{"n": 20, "minimal_sets": [[0,19]]}"#);
    let out = run(&["pc", p(&f), "--cap", "12"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn pc_and_q_of_majority() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "maj3.json", MAJ3);
    let pc = json(&run(&["pc", p(&f)]));
    assert!((pc["p_c"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    let q = json(&run(&["q", p(&f)]));
    assert!((q["q"].as_f64().unwrap() - 6f64.powf(-0.5)).abs() < 1e-6);
    assert_eq!(q["G"], serde_json::json!([[0, 1], [0, 2], [1, 2]]));
    let qs = json(&run(&["qstar", p(&f)]));
    assert_eq!(qs["group_order"], 6);
    assert!(qs["q"].as_f64().unwrap() <= q["q"].as_f64().unwrap() + 1e-6);
}

#[test]
fn audit_rows() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "sub.json", r#"{"n": 4, "minimal_sets": [[0,1]]}"#);
    let row = json(&run(&["audit", p(&f)]));
    assert!((row["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let row = json(&run(&["audit", "--gen", "majority:3"]));
    assert!((row["ratio"].as_f64().unwrap() - 1.224_744_871).abs() < 1e-6);
    let row = json(&run(&["audit", "--gen", "dual-tribes:8:2", "--qstar"]));
    assert!((row["ratio"].as_f64().unwrap() - 1.429_717_339_8).abs() < 1e-7);
    assert!(row["q_star"].as_f64().is_some());
}

#[test]
fn graph_reports() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "tri.json", TRIANGLE4);
    let pe = json(&run(&["graph", "pe", p(&g)]));
    assert!((pe["p_e"].as_f64().unwrap() - 4f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    assert_eq!(pe["constraints"].as_array().unwrap().len(), 7);
    let d = json(&run(&["graph", "density", p(&g)]));
    assert_eq!(d["density"], serde_json::json!([1, 1]));
    let fam = json(&run(&["graph", "family", p(&g), "--n", "4"]));
    assert_eq!(fam["n"], 6);
    assert_eq!(fam["minimal_sets"].as_array().unwrap().len(), 4);
    let q = json(&run(&["graph", "q", p(&g), "--n", "4"]));
    assert!(q["q"].as_f64().unwrap() >= q["half_p_e"].as_f64().unwrap() - 1e-6);
    let bad = write(&dir, "bad.json", r#"{"vertices": 3, "edges": [[0,3]]}"#);
    assert_eq!(run(&["graph", "pe", p(&bad)]).status.code(), Some(2));
}

#[test]
fn tree_bracket() {
    let dir = TempDir::new().unwrap();
    let g = write(
        &dir,
        "path.json",
        r#"{"vertices": 3, "edges": [[0,1],[1,2]]}"#,
    );
    let b = json(&run(&["graph", "tree", p(&g), "--n", "100"]));
    assert!((b["lower"].as_f64().unwrap() - 100f64.ln() / 100.0).abs() < 1e-12);
    let t = write(&dir, "tri.json", TRIANGLE4);
    assert_eq!(
        run(&["graph", "tree", p(&t), "--n", "10"]).status.code(),
        Some(2)
    );
}

#[test]
fn monte_carlo_modes() {
    let args = [
        "mc",
        "--property",
        "hamilton",
        "--n",
        "8",
        "--p",
        "0.9",
        "--trials",
        "1000",
        "--seed",
        "5",
    ];
    let first = run(&args);
    let v = json(&first);
    assert!(v["result"]["estimate"].as_f64().unwrap() > 0.9);
    assert_eq!(v["result"]["seed"], 5);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    let out = run(&[
        "mc",
        "--property",
        "trianglefactor",
        "--n",
        "5",
        "--p",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divisible"));

    let out = run(&["mc", "--property", "subgraph", "--n", "5", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn monte_carlo_critical_probability() {
    let dir = TempDir::new().unwrap();
    let edge = write(&dir, "edge.json", r#"{"vertices": 2, "edges": [[0,1]]}"#);
    let v = json(&run(&[
        "mc",
        "--property",
        "subgraph",
        "--pattern",
        p(&edge),
        "--n",
        "5",
        "--mode",
        "pc",
        "--trials",
        "10000",
        "--width",
        "0.02",
    ]));
    let exact = 1.0 - 2f64.powf(-0.1);
    let r = &v["result"];
    assert!(r["lo"].as_f64().unwrap() <= exact && exact <= r["hi"].as_f64().unwrap());

    let out = run(&[
        "mc",
        "--property",
        "subgraph",
        "--pattern",
        p(&edge),
        "--n",
        "5",
        "--mode",
        "pc",
        "--trials",
        "100",
        "--width",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["converged"], false);
}

#[test]
fn sweep_witnesses() {
    let dir = TempDir::new().unwrap();
    let dict = write(&dir, "dict.json", r#"{"n": 1, "minimal_sets": [[0]]}"#);
    let v = json(&run(&["sweep", p(&dict)]));
    assert!((v["witness"]["p"].as_f64().unwrap() - 0.5).abs() < 1e-8);

    let maj = write(&dir, "maj3.json", MAJ3);
    let csv_path = dir.path().join("grid.csv");
    let v = json(&run(&[
        "sweep",
        p(&maj),
        "--eps",
        "0.5",
        "--csv-out",
        p(&csv_path),
    ]));
    assert!(v["witness"]["p"].as_f64().is_some());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("p,m,dm_dp,influence,iso_gap,optimality_ratio\n"));
    assert_eq!(csv.lines().count(), 1001);

    let gen = run(&["gen", "dual-tribes:16:2"]);
    let dt = write(&dir, "dt.json", std::str::from_utf8(&gen.stdout).unwrap());
    let v = json(&run(&["sweep", p(&dt)]));
    assert!(v["witness"]["p"].as_f64().is_some());
    assert!(v["wide_scan"]["lower"].as_f64().unwrap() < v["wide_scan"]["upper"].as_f64().unwrap());
}

#[test]
fn gen_outputs_family_json() {
    let v = json(&run(&["gen", "subcube:4:0,1"]));
    assert_eq!(v, serde_json::json!({"minimal_sets": [[0, 1]], "n": 4}));
    let a = run(&["gen", "random:8:5", "--seed", "3"]);
    let b = run(&["gen", "random:8:5:3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run(&["gen", "tribes:4"]).status.code(), Some(2));
}
