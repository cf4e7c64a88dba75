use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_metastable"));
    c.env_remove("METASTABLE_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("metastable-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bound_flat_examples() {
    let o = run(&["bound", "--expr", "F(0)+2", "--lambda", "1/2", "--lambda-prime", "1/4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("m_prime=16\n"));
    let o = run(&["bound", "--expr", "5"]);
    assert!(stdout(&o).starts_with("m_prime=5\n"));
    let o = run(&["bound", "--expr", "F(0)+3", "--schedule", "concentrated"]);
    assert!(stdout(&o).starts_with("m_prime=12\n"));
}

#[test]
fn bound_json_is_parseable() {
    let o = run(&["bound", "--expr", "F(0)+1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m_prime"], "8");
}

#[test]
fn nested_bound_reports_exhaustion() {
    let o = run(&["bound", "--expr", "F(F(0))+1", "--lambda", "3/4", "--lambda-prime", "1/4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[0, 1, 8, 1024]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["bound", "--expr", "F(0"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--expr", "1", "--lambda", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--expr", "1", "--lambda", "1/4", "--lambda-prime", "1/2"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--check", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn empty_campaign_passes() {
    let o = run(&["verify", "--check", "bound", "--size", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"summary\""));
}

#[test]
fn stub_check_fails_with_replayable_case() {
    let dir = scratch("stub");
    let o = run(&["verify", "--check", "stub", "--size", "2", "--failures-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 2);
    let replay = run(&["verify", "--instance", files[0].to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(1));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn campaigns_are_deterministic() {
    let args = ["verify", "--check", "implications", "--seed", "9", "--size", "40", "--jobs", "3"];
    let a = run(&args);
    let b = run(&["verify", "--check", "implications", "--seed", "9", "--size", "40", "--jobs", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn budget_variable_overrides_flag() {
    let args = ["verify", "--check", "bound_exact", "--seed", "3", "--size", "20", "--budget", "10000000"];
    let o = bin().args(args).env("METASTABLE_BUDGET", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let last = stdout(&o).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["summary"]["counts"]["ok"].as_u64().unwrap_or(0), 0);
    assert!(v["summary"]["counts"]["undecided"].as_u64().unwrap() > 0);
    let bad = bin().args(args).env("METASTABLE_BUDGET", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn table_flat_rows_match() {
    let o = run(&["table", "--n", "1..3", "--lambda", "3/4", "--lambda-prime", "1/4", "--max-steps", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("expr,n,lambda,lambda_prime,schedule,engine_m_prime,closed_form,match"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().any(|r| r.starts_with("F(0)+2,2,3/4,1/4,default,8,8,yes")));
    assert!(rows.iter().filter(|r| r.starts_with("F(0)")).all(|r| r.ends_with(",yes")));
}

#[test]
fn modes_tail_indicator() {
    let o = run(&["modes", "--family", "tail_indicator"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let report = if v.is_array() { v[0].clone() } else { v };
    assert_eq!(report["ae"], "holds");
    assert_eq!(report["au"], "fails");
    assert_eq!(report["aum"], "holds");
    assert_eq!(report["aum_prime"], "fails");
}

#[test]
fn dct_on_constant_instance() {
    let dir = scratch("dct");
    let path = dir.join("constant.json");
    fs::write(&path, r#"{"weights": ["1/2","1/2"], "funcs": {"prefix": [], "tail": ["1/3","1"], "stab": 0}}"#).unwrap();
    for cmd in ["dct", "egorov"] {
        let o = run(&[cmd, "--instance", path.to_str().unwrap(), "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["m"], "0", "{cmd}");
        assert_eq!(v["m2"], "0", "{cmd}");
    }
    fs::remove_dir_all(dir).unwrap();
}
