use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use thetagraph::rational::{frac, parse};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thetagraph"))
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn make(dir: &TempDir, name: &str, family: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["make"];
    args.extend_from_slice(family);
    args.extend_from_slice(&["--out", path_str(&path)]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn make_prints_graph_json() {
    let out = run(&["make", "complete", "-n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let g = thetagraph::MetricGraph::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (4, 6));
}

#[test]
fn info_reports_minimal_theta() {
    let dir = TempDir::new().unwrap();
    let k4 = make(&dir, "k4.json", &["complete", "-n", "4"]);
    let r = report(&run(&["info", path_str(&k4)]));
    assert_eq!(r["verdict"], "theta_containing");
    assert_eq!(r["details"]["minimal_theta_total"], "5");

    let c6 = make(&dir, "c6.json", &["cycle", "-n", "6"]);
    let out = run(&["info", path_str(&c6)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "theta_free");
}

#[test]
fn witness_exit_codes() {
    let dir = TempDir::new().unwrap();
    let t = make(&dir, "t.json", &["theta", "--lengths", "2,2,2"]);
    let out = run(&["witness", path_str(&t)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["details"]["gap"], "1/12");

    let c4 = make(&dir, "c4.json", &["cycle", "-n", "4"]);
    let out = run(&["witness", path_str(&c4)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn negtype_on_witness_points_is_refuted_and_verifiable() {
    let dir = TempDir::new().unwrap();
    let t = make(&dir, "t.json", &["theta", "--lengths", "1,1,1"]);
    let w = dir.path().join("w.json");
    assert_eq!(run(&["witness", path_str(&t), "--out", path_str(&w)]).status.code(), Some(0));

    let n = dir.path().join("n.json");
    let out = run(&["negtype", path_str(&t), "--points", path_str(&w), "--out", path_str(&n)]);
    assert_eq!(out.status.code(), Some(1));
    let gamma = parse(report(&out)["details"]["gamma"].as_str().unwrap()).unwrap();
    assert!(gamma > frac(0, 1));

    for cert in [&w, &n] {
        let out = run(&["verify", path_str(cert), path_str(&t)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(report(&out)["verdict"], "valid");
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = TempDir::new().unwrap();
    let t = make(&dir, "t.json", &["theta", "--lengths", "1,1,1"]);
    let w = dir.path().join("w.json");
    run(&["witness", path_str(&t), "--out", path_str(&w)]);
    let text = std::fs::read_to_string(&w).unwrap();
    let mut cert: Value = serde_json::from_str(&text).unwrap();
    cert["gap"] = Value::String("1/6".into());
    std::fs::write(&w, cert.to_string()).unwrap();
    let out = run(&["verify", path_str(&w), path_str(&t)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["verdict"], "invalid");
}

#[test]
fn gap_on_two_points_brackets_minus_quarter() {
    let dir = TempDir::new().unwrap();
    let p = make(&dir, "p.json", &["path", "-n", "2"]);
    let out = run(&["gap", path_str(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let lower = parse(r["details"]["lower"].as_str().unwrap()).unwrap();
    let upper = parse(r["details"]["upper"].as_str().unwrap()).unwrap();
    let quarter = frac(-1, 4);
    assert!(lower <= quarter && quarter <= upper);
}

#[test]
fn l1_respects_size_bound() {
    let dir = TempDir::new().unwrap();
    let k4 = make(&dir, "k4.json", &["complete", "-n", "4"]);
    let out = run(&["l1", path_str(&k4)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "l1_embeddable");
    let out = run(&["l1", path_str(&k4), "--max-cuts-n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let dir = TempDir::new().unwrap();
    let g = make(&dir, "r.json", &["random", "-n", "6", "-m", "9", "--seed", "3"]);
    let strip = |out: Output| {
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("wall_time_ms");
        r
    };
    for cmd in ["info", "negtype", "gap"] {
        let a = strip(run(&[cmd, path_str(&g)]));
        let b = strip(run(&[cmd, path_str(&g)]));
        assert_eq!(a, b, "{cmd}");
    }
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"vertices\": [\"a\"], \"edges\": [{\"id\": \"e\", \"ends\": [\"a\", \"z\"], \"length\": \"1\"}]}").unwrap();
    assert_eq!(run(&["info", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["info", "/nonexistent/graph.json"]).status.code(), Some(2));
    assert_eq!(run(&["make", "complete"]).status.code(), Some(2));
}

#[test]
fn check_paper_list_and_mutation() {
    let out = run(&["check-paper", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 10);

    let out = run(&["check-paper", "--only", "1,8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["check-paper", "--only", "8", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL  8"));
}
