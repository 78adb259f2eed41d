use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bench(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&["gen", "--family", "greedy-trap", "--params", r#"{"m":4}"#, "--out", "trap.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bench(&["opt", "--instance", "trap.json"], dir.path());
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["opt_cost"], report["annotation"]["value"]);
}

#[test]
fn two_member_families_write_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let params = r#"{"n":3,"f0":9.0,"fdc_fixed_costs":[1.0],"a":1.0}"#;
    let out = bench(&["gen", "--family", "fixed-cost-pair", "--params", params, "--out", "pair.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("pair.0.json").exists());
    assert!(dir.path().join("pair.1.json").exists());
}

#[test]
fn run_writes_reproducible_csvs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("o.json"), r#"{"sweep":[4,8],"replications":2}"#).unwrap();
    let args = ["run", "--experiment", "single-fdc-varying", "--config", "o.json", "--seed", "9"];
    for out_dir in ["a", "b"] {
        let out = bench(&[&args[..], &["--out", out_dir]].concat(), dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["rows.csv", "aggregate.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    let rows = fs::read_to_string(dir.path().join("a/rows.csv")).unwrap();
    assert!(rows.starts_with("experiment,sweep_value,policy,replication,seed,status"));
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bench(&["run", "--experiment", "nope", "--out", "x"], dir.path()).status.code(), Some(2));
    assert_eq!(bench(&["accept", "--suite", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(bench(&["gen", "--family", "greedy-trap", "--params", "{", "--out", "x"], dir.path()).status.code(), Some(2));
}

#[test]
fn accept_prints_a_verdict_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&["accept", "--suite", "greedy-trap"], dir.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS greedy-trap"));
}

#[test]
fn serve_answers_each_line() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bench"))
        .arg("serve")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let requests = [
        r#"{"v":1,"id":1,"op":"open","policy":"pure-greedy","header":{"n":1,"K":1,"fixed_costs":[3.0,1.0],"cost_regime":"time-varying","inventory":[2]}}"#,
        r#"{"v":1,"id":2,"op":"decide","session":"s1","order":[1],"costs":[[1.0],[1.0]]}"#,
        r#"{"v":1,"id":3,"op":"state","session":"s1"}"#,
    ];
    {
        let mut stdin = child.stdin.take().unwrap();
        for r in requests {
            writeln!(stdin, "{r}").unwrap();
        }
    }
    let out = child.wait_with_output().unwrap();
    let replies: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(replies.len(), 3);
    for (i, r) in replies.iter().enumerate() {
        assert_eq!(r["id"], i as u64 + 1);
        assert_eq!(r["ok"], true, "{r}");
    }
    assert_eq!(replies[1]["period_cost"].as_f64(), Some(2.0));
}
