use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ATOM: &str = r#"{"type":"atomic","atoms":[[0,1]]}"#;

fn decaykit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decaykit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn schema_valid(report: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "report violates schema: {msgs:?}");
}

fn csv_body(text: &str) -> Vec<Vec<String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes()).records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn deltan_csv_has_twenty_decreasing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let atom = dir.path().join("atom.json");
    std::fs::write(&atom, ATOM).unwrap();
    let o = decaykit(&["deltan", "--inner", &format!(r#"{{"singular":{ATOM}}}"#), "--n", "1..20", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# {"), "config comment first");
    let rows = csv_body(&text);
    assert_eq!(rows.len(), 20);
    let delta: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(delta.windows(2).all(|w| w[1] < w[0]), "{delta:?}");

    // same numbers when the measure comes from a file
    let o2 = decaykit(&["deltan", "--measure", atom.to_str().unwrap(), "--n", "1..20", "--format", "csv"]);
    assert_eq!(csv_body(&stdout(&o2)), rows);
}

#[test]
fn json_reports_validate_against_schema() {
    let o = decaykit(&["hausdorff", "--set", "point", "--stages", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    schema_valid(&v);
    assert_eq!(v["seed"], 7);
    let names: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn verify_subset_reports_and_passes() {
    let o = decaykit(&["verify", "--suite", "defect_rank_one,closed_form_min_modulus", "--seed", "11"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    schema_valid(&v);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["config"]["seed"], 11);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs[0]["name"], "closed_form_min_modulus");
    assert_eq!(recs[1]["name"], "defect_rank_one");
    assert!(recs.iter().all(|r| r["passed"] == true));
}

#[test]
fn verify_full_battery_lists_every_check() {
    let o = Command::new(env!("CARGO_BIN_EXE_decaykit"))
        .args(["verify", "--suite", "all", "--seed", "7"])
        .env("DECAYKIT_THREADS", "2")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    schema_valid(&v);
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 12);
    let mut criteria: Vec<u64> = recs.iter().map(|r| r["criterion"].as_u64().unwrap()).collect();
    criteria.sort_unstable();
    assert_eq!(criteria, (1..=12).collect::<Vec<_>>());
    assert_eq!(o.status.success(), v["passed"] == true);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn non_contraction_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("not_a_contraction.csv");
    std::fs::write(&p, "1.2,0,0,0\n0,0,0.5,0\n").unwrap();
    let o = decaykit(&["charfn", "--matrix", p.to_str().unwrap()]);
    assert!(!o.status.success());
    let e = stderr(&o);
    assert!(e.contains("charfn: matrix is not a contraction: norm 1.2"), "{e}");
}

#[test]
fn charfn_anchor_table() {
    let o = decaykit(&["charfn", "--matrix", "0.3,0,0,0\n0,0,0.8,0\n", "--n", "5", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_body(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let norm: f64 = rows[0][1].parse().unwrap();
    let bound: f64 = rows[0][3].parse().unwrap();
    assert!((norm - 411.522633744856).abs() < 1e-9);
    assert!(bound >= 205.26);
}

#[test]
fn malformed_descriptor_names_the_location() {
    let o = decaykit(&["eval", "--inner", "{\"blaschke\": [[0.5, 0]],\n \"constant\": }", "--z", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("--inner") && e.contains("line 2"), "{e}");
}

#[test]
fn failing_assertion_exits_nonzero() {
    // δₙ is asserted nonincreasing in the order given
    let o = decaykit(&["deltan", "--measure", ATOM, "--n", "3,1"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn rerun_reproduces_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let o = decaykit(&[
        "sarason",
        "--measure",
        ATOM,
        "--phi",
        "[0, [0.5, 0.25]]",
        "--k",
        "32",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = decaykit(&["rerun", a.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let read = |p: &Path| -> Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let (va, vb) = (read(&a), read(&b));
    assert_eq!(va["config"], vb["config"]);
    assert_eq!(va["table"], vb["table"]);
    assert_eq!(va["records"][0]["values"], vb["records"][0]["values"]);
    assert_eq!(va["records"][0]["inputs_digest"], vb["records"][0]["inputs_digest"]);
}

#[test]
fn modelspace_matrix_export() {
    let o = decaykit(&["modelspace", "matrix", "--measure", ATOM, "--M", "8", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_body(&stdout(&o)).len(), 64);
}
