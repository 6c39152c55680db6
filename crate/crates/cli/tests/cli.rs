use std::path::PathBuf;
use std::process::{Command, Output};

fn pqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pqec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn estimate_json_has_metadata() {
    let o = pqec(&["estimate", "--n", "8"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metadata"]["tool"], "pqec");
    assert_eq!(v["metadata"]["experiment"], "estimate");
    let assumptions = v["metadata"]["assumptions"].as_array().unwrap();
    assert!(assumptions.iter().all(|a| a["assumed"] == true));
    let f = v["result"]["fidelity"].as_f64().unwrap();
    assert!(f > 0.0 && f < 1.0);
}

#[test]
fn csv_outputs_carry_comment_header() {
    let o = pqec(&["win-matrix", "--programs", "8", "--devices", "5000"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "device_qubits,logical_qubits,value");
}

#[test]
fn malformed_config_exits_2() {
    let f = scratch("bad.json");
    std::fs::write(&f, "{ not json").unwrap();
    let o = pqec(&["--config", f.to_str().unwrap(), "compare"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&f, r#"{"sizez": [8]}"#).unwrap();
    let o = pqec(&["--config", f.to_str().unwrap(), "compare"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sizez"));
    let o = pqec(&["schedule", "--ansatz", "qaoa"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pqec(&["estimate", "--p-phys", "0.02"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_program_exits_3() {
    let o = pqec(&["estimate", "--n", "64", "--budget", "5000"]);
    assert_eq!(o.status.code(), Some(3));
    let o = pqec(&["estimate", "--n", "64", "--budget", "5000", "--allow-over-budget"]);
    assert!(o.status.success());
}

#[test]
fn config_file_then_flags() {
    let f = scratch("sched.json");
    std::fs::write(&f, r#"{"experiment": "schedule", "n": 8, "ansatz": "linear"}"#).unwrap();
    let o = pqec(&["--config", f.to_str().unwrap(), "--print-config", "schedule", "--n", "12"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 12);
    assert_eq!(v["ansatz"], "linear");
    let o = pqec(&["--config", f.to_str().unwrap(), "estimate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_file_written() {
    let f = scratch("sched.csv");
    let o = pqec(&["schedule", "--n", "20", "--format", "csv", "--out", f.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&f).unwrap();
    let row = text.lines().last().unwrap();
    assert_eq!(row.split(',').nth(3), Some("71"));
}

#[test]
fn seeded_runs_repeat_and_seeds_differ() {
    let a = pqec(&["shuffle-sim", "--trials", "5000", "--seed", "1", "--policy", "naive(2)"]);
    let b = pqec(&["shuffle-sim", "--trials", "5000", "--seed", "1", "--policy", "naive(2)"]);
    let c = pqec(&["shuffle-sim", "--trials", "5000", "--seed", "2", "--policy", "naive(2)"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn unseeded_run_records_its_seed() {
    let o = pqec(&["shuffle-sim", "--trials", "100", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let seed = v["metadata"]["seed"].as_u64().unwrap();
    let again = pqec(&["shuffle-sim", "--trials", "100", "--format", "json", "--seed", &seed.to_string()]);
    let w: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(v["result"], w["result"]);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |t: &str| {
        Command::new(env!("CARGO_BIN_EXE_pqec"))
            .args(["win-matrix", "--programs", "8,12,16", "--devices", "5000,20000"])
            .env("PQEC_THREADS", t)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}
