use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spencer-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    json_of(&out.stdout)
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = validator().iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v}");
}

#[test]
fn circle_determinant() {
    let length = "6.283185307";
    let v = ok(&["det", "--model", "circle", "--length", length]);
    let det = v["result"]["det"].as_f64().unwrap();
    let l: f64 = length.parse().unwrap();
    assert!((det - l * l).abs() < 1e-7, "{det}");
    assert!((det - 39.4784176).abs() < 1e-6);
    assert!(v["result"]["report"]["error_bound"].is_number());
}

#[test]
fn p1_index() {
    let v = ok(&["index", "--model", "P1", "--twist", "3"]);
    assert_eq!(v["result"]["index"], 4);
}

#[test]
fn wave_is_hyperbolic_in_dt() {
    let v = ok(&["classify", "--direction", "dt", &fixture("wave.pde")]);
    assert_eq!(v["result"]["label"], "hyperbolic");
    assert_eq!(v["seed"], 0);
}

#[test]
fn laplace_is_elliptic() {
    let v = ok(&["classify", &fixture("laplace.pde")]);
    assert_eq!(v["result"]["label"], "elliptic");
}

#[test]
fn nonlinear_is_parse_error() {
    let out = run(&["symbol", &fixture("nonlinear.pde")]);
    assert_eq!(out.status.code(), Some(2));
    let err = json_of(&out.stderr);
    assert_eq!(err["error"]["category"], "parse");
    assert_eq!(err["error"]["diagnostic"]["line"], 1);
    assert!(
        err["error"]["message"]
            .as_str()
            .unwrap()
            .contains("non-linear")
            || err["error"]["message"]
                .as_str()
                .unwrap()
                .contains("nonlinear")
    );
    assert_valid(&err);
}

#[test]
fn text_diagnostic_has_position() {
    let out = run(&["symbol", "--format", "text", &fixture("nonlinear.pde")]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("nonlinear.pde:1:"), "{msg}");
}

#[test]
fn precondition_errors_exit_3() {
    let out = run(&["det", "--model", "circle", "--length", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_valid(&json_of(&out.stderr));
    assert_eq!(run(&["index"]).status.code(), Some(3));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(3));
}

#[test]
fn tolerance_violation_exits_4() {
    let out = run(&["det", "--model", "circle", "--tolerance", "0"]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json_of(&out.stderr)["error"]["category"], "numeric");
}

#[test]
fn byte_identical_reports() {
    let args = [
        "classify",
        "--direction",
        "dt",
        "--seed",
        "7",
        &fixture("wave.pde"),
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let t = ["torsion", "--model", "torus", "--format", "text"];
    assert_eq!(run(&t).stdout, run(&t).stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["torsion", "--model", "torus"];
    let one = Command::new(env!("CARGO_BIN_EXE_spencer-lab"))
        .args(args)
        .env("SPENCER_LAB_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_spencer-lab"))
        .args(args)
        .env("SPENCER_LAB_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn rationals_are_strings() {
    let out = run(&["symbol", &fixture("half.pde")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(-1/3)*u"), "{text}");
    let v = ok(&["grr", "--model", "P2", "--twist", "1"]);
    let values: Vec<&Value> = v["result"]["breakdown"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| &b["value"])
        .collect();
    assert!(values.iter().all(|x| x.is_string()));
    assert!(values.contains(&&Value::from("3/2")));
}

#[test]
fn error_bound_is_separate_field() {
    let v = ok(&["det", "--model", "circle"]);
    let prov = v["provenance"].as_array().unwrap();
    assert!(!prov.is_empty());
    assert!(prov.iter().all(|p| p.get("error_bound").is_some()));
    assert!(v["result"]["report"]["det"].is_number());
}

#[test]
fn text_format_is_indented_payload() {
    let out = run(&["index", "--model", "P1", "--twist", "3", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("command: index"));
    assert!(text.lines().any(|l| l.trim() == "index: 4"), "{text}");
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_spencer-lab"))
        .args(["classify", "--direction", "dt", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(std::fs::read(fixture("wave.pde")).unwrap().as_slice())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(json_of(&out.stdout)["result"]["label"], "hyperbolic");
}

#[test]
fn every_command_validates_against_schema() {
    let lap = fixture("laplace.pde");
    let wave = fixture("wave.pde");
    let cases: Vec<Vec<&str>> = vec![
        vec!["symbol", &lap],
        vec!["prolong", &lap],
        vec!["spencer", &lap],
        vec!["involutivity", &lap],
        vec!["finite-type", &lap],
        vec!["poincare", &lap],
        vec!["classify", "--direction", "dt", &wave],
        vec!["restrict", "--direction", "dy", &lap],
        vec!["kunneth", "--depth", "2", &lap],
        vec!["index", "--model", "P2", "--twist", "2"],
        vec!["index", &lap],
        vec!["grr", "--model", "P1", "--twist", "5"],
        vec!["boundary-index", "--model", "disk"],
        vec!["torsion", "--model", "circle"],
        vec!["det", "--model", "torus", "--tau", "0.5,1"],
        vec!["bcov"],
        vec!["quillen", "--model", "torus"],
        vec!["crosscheck"],
    ];
    for args in cases {
        let v = ok(&args);
        assert_eq!(v["command"], args[0]);
        assert_valid(&v);
    }
}
