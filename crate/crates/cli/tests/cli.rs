use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_volterra");

fn volterra(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("VOLTERRA_WORKERS").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&doc).expect("schema compiles")
}

fn valid_json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = volterra(&full);
    let doc: Value = serde_json::from_slice(&out.stdout).expect("JSON output");
    let errors: Vec<String> = schema().iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?}: {errors:?}");
    doc
}

#[test]
fn classify_exit_codes() {
    let log = volterra(&["classify", "--symbol", "log", "--op", "Tg", "--alpha", "0", "--beta", "0"]);
    assert_eq!(code(&log), 0);
    assert!(String::from_utf8_lossy(&log.stdout).contains("verdict: Unbounded"));

    let zero = volterra(&["classify", "--symbol", "zero", "--op", "Sg", "--alpha", "1", "--beta", "0"]);
    assert_eq!(code(&zero), 0);
    assert!(String::from_utf8_lossy(&zero.stdout).contains("Compact"));

    let unknown = volterra(&["classify", "--symbol", "nosuch", "--op", "Tg", "--alpha", "0", "--beta", "0"]);
    assert_eq!(code(&unknown), 1);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown symbol"));
}

#[test]
fn invalid_parameters_are_errors() {
    let base = ["classify", "--symbol", "identity", "--op", "Tg", "--beta", "0"];
    assert_eq!(code(&volterra(&[&base[..], &["--alpha", "-1"]].concat())), 1);
    assert_eq!(code(&volterra(&[&base[..], &["--alpha", "0", "--k-max", "41"]].concat())), 1);
    assert_eq!(code(&volterra(&[&base[..], &["--alpha", "0", "--angles", "100"]].concat())), 1);
    assert_eq!(code(&volterra(&["lemma2", "--gamma", "1.6", "--eta", "1.571"])), 1);
}

#[test]
fn starved_ladder_is_inconclusive() {
    let out = volterra(&["report", "--k-max", "6", "--format", "csv"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Inconclusive"));
}

#[test]
fn report_csv_header_is_frozen() {
    let out = volterra(&["report", "--format", "csv", "--k-max", "6"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().next(), Some("symbol,op,alpha,beta,verdict,value,lower,upper,probe_exp,agree"));
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn flags_win_over_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "symbol = \"log\"\nop = \"Tg\"\nalpha = 0.0\nbeta = 0.0\nformat = \"csv\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = volterra(&["classify", "--config", cfg]);
    assert_eq!(code(&from_file), 0);
    assert!(String::from_utf8_lossy(&from_file.stdout).starts_with("criterion,question"));

    let overridden = volterra(&["classify", "--config", cfg, "--symbol", "identity", "--format", "json"]);
    let doc: Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!(doc["result"]["symbol"], "identity");

    std::fs::write(dir.path().join("bad.toml"), "no_such_key = 1\n").unwrap();
    let bad = volterra(&["list", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn output_path_receives_the_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("list.json");
    let out = volterra(&["list", "--format", "json", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(doc["command"], "list");
}

#[test]
fn json_output_matches_schema() {
    let case = ["--symbol", "log", "--op", "Tg", "--alpha", "0", "--beta", "1"];
    valid_json(&[&["classify"][..], &case].concat());
    valid_json(&[&["opnorm"][..], &case].concat());
    valid_json(&[&["probe"][..], &case, &["--n-max", "32"]].concat());
    valid_json(&["opnorm", "--symbol", "cayley", "--op", "Sg", "--alpha", "0", "--beta", "1"]);
    valid_json(&["norm", "--symbol", "log", "--alpha", "1", "--bloch"]);
    valid_json(&["norm", "--symbol", "koebe2", "--alpha", "2", "--bloch"]);
    valid_json(&["lemma2", "--gamma", "0.785", "--eta", "1.571"]);
    valid_json(&["list"]);
    let report = valid_json(&["report", "--k-max", "6"]);
    assert_eq!(report["result"].as_array().unwrap().len(), 15);
}

#[test]
fn schema_rejects_malformed_documents() {
    let v = schema();
    assert!(!v.is_valid(&serde_json::json!({ "command": "report", "result": [{ "symbol": "z" }] })));
    assert!(!v.is_valid(&serde_json::json!({ "command": "nope", "result": {} })));
}

#[test]
fn sector_command_reports_rotation_invariance() {
    let doc = valid_json(&["lemma2", "--gamma", "1.0471975511965976", "--eta", "2.0943951023931953", "--theta", "1.0"]);
    let r = &doc["result"];
    assert_eq!(r["ok"], true);
    assert!(r["sweep_spread"].as_f64().unwrap() <= 1e-8);
}
