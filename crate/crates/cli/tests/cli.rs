use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_coarsecoh"));
    c.env_remove("COARSECOH_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn coarse_cohomology_of_the_plane() {
    let v = run_json(&["coarse", "--space", "grid", "--dim", "2", "--half-extent", "12"]);
    let degrees = v["profile"]["degrees"].as_array().unwrap();
    assert_eq!(degrees.len(), 4);
    for d in degrees {
        let want = if d["degree"] == 2 { 1 } else { 0 };
        assert_eq!(d["verdict"], "STABILIZED", "{d}");
        assert_eq!(d["rank"], want, "{d}");
    }
    assert_eq!(v["config"]["subcommand"], "coarse");
    assert_eq!(v["input_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn four_cycle_betti_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let square = dir.path().join("square.json");
    std::fs::write(&square, r#"{"points": ["a", "b", "c", "d"], "dist": [[0,1,2,1],[1,0,1,2],[2,1,0,1],[1,2,1,0]]}"#)
        .unwrap();
    let v = run_json(&["betti", "--input", square.to_str().unwrap(), "--scale", "1.0", "--max-dim", "2"]);
    assert_eq!(v["betti"], serde_json::json!([1, 1, 0]));
}

#[test]
fn d_a_check_on_circle_pack() {
    let v = run_json(&["check-dA", "--space", "circle-pack", "--circles", "4", "--subset", "ray"]);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["report"]["pass"], true);
}

#[test]
fn results_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res/acyclic.json");
    let o = run(&[
        "check-acyclic", "--space", "grid", "--dim", "2", "--half-extent", "8", "--seed", "5", "--radii", "1",
        "-o", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.with_extension("tsv").exists());
    let r = run_json(&["replay", out.to_str().unwrap()]);
    assert_eq!(r["identical"], true);
    assert_eq!(r["replayed_input_hash"], read(&out)["input_hash"]);

    // a tampered result no longer replays
    let mut v = read(&out);
    v["report"]["balls_checked"] = Value::from(12345);
    std::fs::write(&out, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["replay", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["verify-homotopy", "--space", "grid", "--dim", "1", "--half-extent", "4", "--seed", "9", "--count", "4"];
    let mut a = run_json(&args);
    let mut b = run_json(&args);
    a.as_object_mut().unwrap().remove("timestamp");
    b.as_object_mut().unwrap().remove("timestamp");
    assert_eq!(a, b);
    assert_eq!(a["failures"], 0);
    assert_eq!(a["verdict"], "PASS");
}

#[test]
fn generated_spaces_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("annulus.json");
    let o = run(&["gen", "--space", "annulus", "--inner", "2", "--outer", "5", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let n = read(&out)["points"].as_u64().unwrap();
    let v = run_json(&["betti", "--input", out.to_str().unwrap(), "--scale", "1.5", "--max-dim", "1"]);
    assert_eq!(v["betti"], serde_json::json!([1, 1]));
    let rips = run_json(&["rips", "--input", out.to_str().unwrap(), "--scale", "1.5", "--max-dim", "0"]);
    assert_eq!(rips["counts"][0].as_u64().unwrap(), n);
}

#[test]
fn full_cochain_is_a_point() {
    let v = run_json(&["full-cochain", "--space", "grid", "--dim", "1", "--half-extent", "2"]);
    assert_eq!(v["betti"], serde_json::json!([1, 0, 0, 0]));
}

#[test]
fn filling_failure_is_reported() {
    // three points spread around the second circle
    let pack = run_json(&["gen", "--space", "circle-pack", "--circles", "2", "--points-per-circle", "12"]);
    let c2 = pack["circles"][1]["members"].as_array().unwrap();
    let tri = format!("{},{},{}", c2[0], c2[4], c2[8]);
    let base = ["fill", "--space", "circle-pack", "--circles", "2", "--points-per-circle", "12", "--cap", "3.9"];
    let o = run(&[&base[..], &["--simplex", &tri]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no filling"));
    let v = run_json(&[&base[..], &["--simplex", &tri, "--audit"]].concat());
    assert!(!v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["verify-homotopy", "--space", "grid"]).status.code(), Some(2));
    assert_eq!(run(&["coarse", "--space", "torus"]).status.code(), Some(2));
    assert_eq!(run(&["complement", "--space", "grid", "--subset", "nowhere"]).status.code(), Some(2));
    assert_eq!(run(&["coarse"]).status.code(), Some(2));
    assert_eq!(run(&["betti", "--space", "grid", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(run(&["fill", "--space", "grid", "--ring", "z"]).status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_one() {
    assert_eq!(run(&["betti", "--input", "/nonexistent/space.csv"]).status.code(), Some(1));
}

#[test]
fn thread_count_from_environment() {
    let out = bin()
        .env("COARSECOH_THREADS", "1")
        .args(["betti", "--space", "grid", "--dim", "1", "--half-extent", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
}
