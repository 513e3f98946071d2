use std::net::TcpListener;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel).display().to_string()
}

fn rulelens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rulelens")).args(args).output().unwrap()
}

fn binary_input() -> Vec<String> {
    vec![
        "--model".into(),
        fixture("gbt/binary.txt"),
        "--format".into(),
        "gbt-text".into(),
        "--data".into(),
        fixture("gbt/binary.csv"),
        "--schema".into(),
        fixture("gbt/binary.schema.json"),
    ]
}

fn with<'a>(head: &[&'a str], tail: &'a [String]) -> Vec<&'a str> {
    head.iter().copied().chain(tail.iter().map(String::as_str)).collect()
}

#[test]
fn extract_writes_every_rule() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rules.json");
    let o = rulelens(&[
        "extract",
        "--model",
        &fixture("credit/rf200.json"),
        "--schema",
        &fixture("credit/schema.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rules: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rules.as_array().unwrap().len(), 6810);
}

#[test]
fn malformed_model_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("broken.json");
    std::fs::write(&model, "{\"model_kind\": \"random_forest\", \"trees\": [").unwrap();
    let o = rulelens(&[
        "extract",
        "--model",
        model.to_str().unwrap(),
        "--schema",
        &fixture("credit/schema.json"),
        "--out",
        dir.path().join("out.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn reduce_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let input = binary_input();
    let mut args = with(&["reduce", "--m", "8", "--xi", "0.5", "--lambda", "0.2", "--report"], &input);
    args.insert(8, report.to_str().unwrap());
    let o = rulelens(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["m"], 8);
    assert_eq!(r["xi"], 0.5);
    assert!(r["selected_rule_ids"].as_array().unwrap().len() <= 8);
    assert!(r["fidelity_train"].as_f64().unwrap() <= 1.0);
    assert!(r["grid_trace"].as_array().unwrap().is_empty());

    let o = rulelens(&with(&["reduce", "--m", "4", "--grid"], &input));
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["grid_trace"].as_array().unwrap().len(), 20);
}

#[test]
fn evaluate_reports_both_methods() {
    let input = binary_input();
    let o = rulelens(&with(&["evaluate", "--m", "6", "--xi", "0.5", "--lambda", "0.5", "--trials", "3", "--seed", "4"], &input));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let methods = r["methods"].as_array().unwrap();
    assert_eq!(methods[0]["method"], "anomaly_biased");
    assert_eq!(methods[1]["method"], "random");
    assert_eq!(methods[1]["trials"].as_array().unwrap().len(), 3);
    let o = rulelens(&with(&["evaluate", "--trials", "0"], &input));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_inputs_exit_one() {
    let input = binary_input();
    let mut bad_schema = input.clone();
    bad_schema[7] = fixture("credit/schema.json");
    assert_eq!(rulelens(&with(&["reduce", "--m", "4"], &bad_schema)).status.code(), Some(1));
    assert_eq!(rulelens(&with(&["reduce", "--m", "0"], &input)).status.code(), Some(1));
    assert_eq!(rulelens(&with(&["reduce", "--xi", "0.5"], &input)).status.code(), Some(1));
    assert_eq!(rulelens(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rulelens(&["--help"]).status.code(), Some(0));
}

#[test]
fn serve_on_a_taken_port_exits_one() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let input = binary_input();
    let o = rulelens(&with(&["serve", "--m", "5", "--port", &port], &input));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot listen"));
}
