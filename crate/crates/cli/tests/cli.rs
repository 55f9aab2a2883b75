use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mplx(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mplx")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("er.json"), r#"{"model":"er","params":{"r":2,"probs":[0.5,0.5,0.25]},"seed":3}"#).unwrap();
    fs::write(dir.path().join("ua.json"), r#"{"model":"ua","params":{},"seed":8}"#).unwrap();
    fs::write(dir.path().join("h.txt"), "2 2\n0 1 1\n0 1 2\n").unwrap();
    dir
}

#[test]
fn sampling_is_deterministic_across_threads() {
    let dir = setup();
    let p = dir.path();
    for model in ["er.json", "ua.json"] {
        let a = stdout(&mplx(&["sample", model, "-n", "40", "--threads", "1"], p));
        let b = stdout(&mplx(&["sample", model, "-n", "40", "--threads", "4"], p));
        let c = stdout(&mplx(&["sample", model, "-n", "40", "--seed", "99"], p));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

#[test]
fn density_of_doubly_covered_edge() {
    let dir = setup();
    let p = dir.path();
    let out = stdout(&mplx(&["homdensity", "h.txt", "er.json"], p));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], 0.25);
    let csv = stdout(&mplx(&["homdensity", "h.txt", "h.txt", "--format", "csv"], p));
    assert_eq!(csv.lines().nth(1).unwrap(), "0.5,1,2");
}

#[test]
fn convert_round_trip_and_decompose() {
    let dir = setup();
    let p = dir.path();
    let json = stdout(&mplx(&["convert", "h.txt", "--to", "json"], p));
    fs::write(p.join("h.json"), &json).unwrap();
    let text = stdout(&mplx(&["convert", "h.json", "--to", "text"], p));
    assert_eq!(text, "2 2\n0 1 1\n0 1 2\n");
    let d = stdout(&mplx(&["decompose", "h.json", "--mode", "disjoint", "--format", "csv"], p));
    assert_eq!(d, "subset,i,j\n\"{1,2}\",0,1\n");
}

#[test]
fn cut_distance_to_itself_is_zero() {
    let dir = setup();
    let p = dir.path();
    mplx(&["sample", "er.json", "-n", "12", "--out", "s"], p);
    let out = stdout(&mplx(&["cutdist", "s/sample.json", "s/sample.json", "--format", "csv"], p));
    assert!(out.lines().nth(1).unwrap().starts_with("0,"), "{out}");
    let norm = stdout(&mplx(&["cutnorm", "s/sample.json", "er.json", "--sandwich"], p));
    let v: serde_json::Value = serde_json::from_str(&norm).unwrap();
    assert_eq!(v["sandwich"]["ok"], true);
}

#[test]
fn stats_and_limits() {
    let dir = setup();
    let p = dir.path();
    mplx(&["sample", "er.json", "-n", "50", "--out", "s"], p);
    let c = stdout(&mplx(&["stats", "s/sample.json", "--stat", "clustering", "--format", "csv"], p));
    assert_eq!(c.lines().count(), 53);
    let conv = stdout(&mplx(&["stats", "s/sample.json", "--stat", "convergence", "--limit", "er.json", "--budget", "10"], p));
    let v: serde_json::Value = serde_json::from_str(&conv).unwrap();
    assert!(v["wass"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
    let l = stdout(&mplx(&["limit", "er.json", "--clustering", "1"], p));
    let v: serde_json::Value = serde_json::from_str(&l).unwrap();
    assert!((v["global"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let step = stdout(&mplx(&["limit", "ua.json", "--cells", "4"], p));
    assert!(step.contains("stepmultiplexon-v1"));
}

#[test]
fn experiment_writes_table_schema_and_report() {
    let dir = setup();
    let p = dir.path();
    let cfg = r#"{
        "format": "experiment-v1",
        "model": {"model": "er", "params": {"r": 2, "probs": [0.5, 0.5, 0.25]}},
        "motifs": ["h.txt"],
        "n_ladder": [20, 40],
        "replications": 2,
        "seed": 4,
        "metrics": ["motif", "clustering"],
        "checks": [{"column": "motif0_abs_err", "kind": "below", "value": 1.0}]
    }"#;
    fs::write(p.join("cfg.json"), cfg).unwrap();
    stdout(&mplx(&["experiment", "cfg.json", "--out", "a"], p));
    stdout(&mplx(&["experiment", "cfg.json", "--out", "b", "--threads", "1"], p));
    let a = fs::read_to_string(p.join("a/results.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(p.join("b/results.csv")).unwrap());
    assert_eq!(a.lines().count(), 5);
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("a/results.schema.json")).unwrap()).unwrap();
    let documented: Vec<&str> = schema["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(documented.join(","), a.lines().next().unwrap());
    let report = fs::read_to_string(p.join("a/report.md")).unwrap();
    let body = |r: &str| r.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&report), body(&fs::read_to_string(p.join("b/report.md")).unwrap()));
    assert!(report.contains("PASS"));
}

#[test]
fn exit_codes() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(mplx(&["frobnicate"], p).status.code(), Some(1));
    assert_eq!(mplx(&["sample", "missing.json", "-n", "3"], p).status.code(), Some(3));
    fs::write(p.join("bad.json"), r#"{"model":"er","params":{"r":2,"probs":[0.5,0.5,0.9]},"seed":1}"#).unwrap();
    assert_eq!(mplx(&["sample", "bad.json", "-n", "3"], p).status.code(), Some(1));
    fs::write(p.join("big.txt"), "12 2\n0 1 1\n").unwrap();
    assert_eq!(mplx(&["homdensity", "big.txt", "h.txt"], p).status.code(), Some(2));
    assert_eq!(mplx(&["--help"], p).status.code(), Some(0));
}
