use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polylearn")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = run(&["gen", "--kind", "uepp", "--m", "2", "--n", "4", "--seed", "9", "--out", s(p)]);
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("sha256:"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn lower_bound_game_matrices() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("g.json");
    assert_eq!(code(&run(&["gen", "--kind", "lbgame", "--x", "0.3", "--y", "0.7", "--out", s(&p)])), 0);
    let g = read_json(&p);
    let a: Vec<Vec<f64>> = serde_json::from_value(g["A"].clone()).unwrap();
    let b: Vec<Vec<f64>> = serde_json::from_value(g["B"].clone()).unwrap();
    assert_eq!(a.len(), 2);
    assert_eq!(b.len(), 2);
    assert!(a.iter().chain(&b).flatten().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn out_of_range_payoffs_are_invalid() {
    let o = run(&["gen", "--kind", "bimatrix", "--a", "[[0,2],[1,0]]", "--b", "[[0,1],[1,0]]"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn learn_writes_labelling_and_manifest() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("u.json");
    let out = dir.path().join("l.json");
    assert_eq!(code(&run(&["gen", "--kind", "uepp", "--m", "2", "--n", "3", "--seed", "1", "--out", s(&inst)])), 0);
    let o = run(&["learn", "--input", s(&inst), "--eps", "0.1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let man = read_json(&dir.path().join("l.json.manifest.json"));
    assert_eq!(man["tool"], "polylearn");
    assert!(man["input_sha256"].as_str().unwrap().len() == 64);
    assert!(man["result"]["queries"].as_u64().unwrap() > 0);
    assert_eq!(man["result"]["coverage"]["is_close"], true);
    assert!(out.exists());
}

#[test]
fn budget_exhaustion_exits_three_without_output() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("u.json");
    let out = dir.path().join("l.json");
    assert_eq!(code(&run(&["gen", "--kind", "uepp", "--m", "2", "--n", "3", "--out", s(&inst)])), 0);
    let o = run(&["learn", "--input", s(&inst), "--eps", "0.1", "--budget", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn adversarial_learn_merges_duplicates() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("u.json");
    let out = dir.path().join("l.json");
    let g =
        run(&["gen", "--kind", "uepp", "--m", "2", "--n", "3", "--duplicates", "1", "--seed", "4", "--out", s(&inst)]);
    assert_eq!(code(&g), 0);
    let o = run(&[
        "learn",
        "--input",
        s(&inst),
        "--eps",
        "0.05",
        "--oracle",
        "adv",
        "--policy",
        "roundrobin",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let man = read_json(&dir.path().join("l.json.manifest.json"));
    assert!(!man["result"]["merges"].as_array().unwrap().is_empty(), "{man}");
}

fn solve_ok(dir: &TempDir, inst: &Path, eps: &str) -> Value {
    let out = dir.path().join("sol.json");
    let o = run(&["solve", "--input", s(inst), "--eps", eps, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    read_json(&out)
}

#[test]
fn solves_lower_bound_game() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("g.json");
    assert_eq!(code(&run(&["gen", "--kind", "lbgame", "--x", "0.2", "--y", "0.6", "--out", s(&inst)])), 0);
    let sol = solve_ok(&dir, &inst, "0.1");
    assert_eq!(sol["result"]["certificate"]["valid"], true);
}

#[test]
fn solves_dominant_strategy_game() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("g.json");
    let g = run(&["gen", "--kind", "bimatrix", "--a", "[[1,1],[0,0]]", "--b", "[[0,1],[0,1]]", "--out", s(&inst)]);
    assert_eq!(code(&g), 0);
    let sol = solve_ok(&dir, &inst, "0.1");
    let row: Vec<f64> = serde_json::from_value(sol["result"]["profile"]["row"].clone()).unwrap();
    let col: Vec<f64> = serde_json::from_value(sol["result"]["profile"]["col"].clone()).unwrap();
    // Regret below 0.1 forces almost all weight on the dominant actions.
    assert!(row[0] > 0.85 && col[1] > 0.85, "{row:?} {col:?}");
}

#[test]
fn solves_jordan_game() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("j.json");
    assert_eq!(code(&run(&["gen", "--kind", "jordan", "--out", s(&inst)])), 0);
    let sol = solve_ok(&dir, &inst, "0.25");
    assert_eq!(sol["result"]["certificate"]["valid"], true);
}

#[test]
fn empty_bench_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let o = run(&["bench", "--family", "lbgame", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.trim_end(), "family,m,n,eps,seed,queries,wall_ms,verified");
}

#[test]
fn bench_rows_verify() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let o = run(&["bench", "--family", "lbgame", "--eps", "0.1", "--seeds", "1,2", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[7] == "true"));
}
