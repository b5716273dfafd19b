use serde_json::Value;
use std::process::Command;
use weightlab::cli::{run, run_json, JobConfig};

fn weightlab(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_weightlab")).args(args).output().unwrap();
    let code = out.status.code().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, report)
}

#[test]
fn characteristic_inside_the_range_exits_zero() {
    let (code, rep) = weightlab(&[
        "characteristic",
        "--class",
        "bpgamma",
        "--p",
        "2",
        "--gamma",
        "0",
        "--weight",
        "power:zeta=0.5",
        "--refinements",
        "5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(rep["schema"], "weightlab.report/1");
    assert_eq!(rep["result"]["verdict"], "finite");
    assert_eq!(rep["config"]["weight"], "power:zeta=0.5");
}

#[test]
fn classify_power_non_member_exits_two() {
    let (code, _) = weightlab(&["classify-power", "--zeta", "2.5", "--p", "4", "--gamma", "0", "--variant", "invariant"]);
    assert_eq!(code, 2);
    let (code, _) = weightlab(&["classify-power", "--zeta", "2.5", "--p", "4", "--gamma", "0", "--variant", "plain"]);
    assert_eq!(code, 0);
}

#[test]
fn fock_sarason_pair_exits_zero() {
    let (code, rep) = weightlab(&["fock-sarason", "--f", "explinear:b=1", "--g", "scale:2,explinear:b=-1"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["is_pair"], true);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(weightlab(&["no-such-command"]).0, 1);
    assert_eq!(weightlab(&["classify-power", "--p", "0.5"]).0, 1);
    assert_eq!(weightlab(&["characteristic", "--weight", "nonsense:x=1"]).0, 1);
    assert_eq!(run_json(r#"{"bogus_field": 1}"#).exit_code, 1);
}

#[test]
fn config_round_trips() {
    let c = JobConfig {
        p: 3.0,
        weight: "expreal:c=0.3".into(),
        seed: 11,
        ..JobConfig::default()
    };
    let text = serde_json::to_string(&c).unwrap();
    let back: JobConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(serde_json::from_str::<JobConfig>("{}").unwrap(), JobConfig::default());
}

#[test]
fn reports_are_reproducible() {
    let cfg = r#"{"command": "rh-certificate", "f": "analytic:a=0.1", "depth": 3}"#;
    let strip = |v: &Value| {
        let mut v = v.clone();
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    let a = run_json(cfg);
    let b = run_json(cfg);
    assert_eq!(a.exit_code, 0);
    assert_eq!(strip(&a.report), strip(&b.report));
}

#[test]
fn csv_outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let squares = dir.path().join("squares.csv");
    let report = dir.path().join("report.json");
    let c = JobConfig {
        command: serde_json::from_str("\"rh-certificate\"").unwrap(),
        f: "analytic:a=0.1".into(),
        depth: 3,
        trace_csv: Some(trace.to_string_lossy().into()),
        emit_squares: Some(squares.to_string_lossy().into()),
        out: Some(report.to_string_lossy().into()),
        ..JobConfig::default()
    };
    let out = run(&c);
    assert_eq!(out.exit_code, 0);
    let t = std::fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("level,regions_evaluated,running_sup"));
    let s = std::fs::read_to_string(&squares).unwrap();
    assert_eq!(s.lines().count(), 1 + 1 + 4 + 16 + 64);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["config"]["depth"], 3);
}
