use std::path::PathBuf;
use std::process::{Command, Output};

fn opcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcap")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_sum_of_three() {
    let o = opcap(&["dag", "analyze", &data("sum3.dag")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("semantic deps=3, static binary ops=2, executed ops=2, bound=2, pass"), "{}", stdout(&o));
}

#[test]
fn eval_dot_product() {
    let o = opcap(&["dag", "eval", &data("dot3.dag"), "--inputs", "1,2,3,4,5,6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "32 ops=5");
}

#[test]
fn analyze_single_input() {
    let o = opcap(&["dag", "analyze", &data("single.dag")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bound=0, pass"));
    let o = opcap(&["dag", "eval", &data("single.dag"), "--inputs", "-3/2"]);
    assert_eq!(stdout(&o).trim(), "3/2 ops=0");
}

#[test]
fn malformed_dag_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dag");
    std::fs::write(&path, "i0\nb pow 0 0\nout 1\n").unwrap();
    let o = opcap(&["dag", "analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let cfg = data("span_basis.json");
    let o = opcap(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("mistakes=3 max_ops="));
    assert!(stdout(&o).trim_end().ends_with("status=clean"));
    opcap(&["run", "--config", &cfg, "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn run_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = opcap(&["run", "--config", &data("bandit_voting.json"), "--seed", "3", "--max-rounds", "5", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let rounds = headers.iter().position(|h| h == "rounds").unwrap();
    assert_eq!(&row[rounds], "5");
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"family": {"variant": "linear_real", "n": 3}, "learner": {"kind": "spam"}}"#).unwrap();
    let o = opcap(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("learner.kind"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = opcap(&["verify", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_csv_matches_json() {
    let csv_out = opcap(&["verify", "--suite", "impossibility", "--format", "csv"]);
    let json_out = opcap(&["verify", "--suite", "impossibility", "--format", "json"]);
    assert_eq!(csv_out.status.code(), Some(0));
    assert_eq!(json_out.status.code(), Some(0));
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_slice(&json_out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(csv_out.stdout.as_slice());
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let mut sorted = headers.clone();
    sorted.sort();
    assert_eq!(sorted, rows[0].keys().cloned().collect::<Vec<_>>());
    let records: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), rows.len());
    for (rec, row) in records.iter().zip(&rows) {
        for (h, cell) in headers.iter().zip(rec.iter()) {
            let expected = match &row[h] {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => String::new(),
                v => v.to_string(),
            };
            assert_eq!(cell, expected, "column {h}");
        }
    }
}

#[test]
fn verify_exit_code_is_the_conjunction_of_verdicts() {
    let o = opcap(&["verify", "--suite", "exact-bounds", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    let all = rows.iter().all(|r| r["verdict"] == serde_json::Value::Bool(true));
    assert_eq!(o.status.code(), Some(if all { 0 } else { 1 }));
}
