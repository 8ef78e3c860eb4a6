use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_jacobi-bc"))
        .args(args)
        .env_remove("JACOBI_BC_PRECISION")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_out(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const GEOMETRIC: &str = r#"{"schema": "jacobi-bc/1", "generator": {"kind": "geometric", "params": {"ratio": 2.0}}}"#;

#[test]
fn recover_free_response() {
    for precision in ["double", "extended", "rational"] {
        let v = json_out(&run(&["recover", "--precision", precision], r#"{"response": [1, 0, 0, 0, 0, 0, 0]}"#));
        assert_eq!(v["a"].as_array().unwrap().len(), 3);
        for k in 0..3 {
            assert!((v["a"][k].as_f64().unwrap() - 1.0).abs() < 1e-12);
            assert!(v["b"][k].as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn recover_round_trips_response_command() {
    let doc = r#"{"a": [1, 1.5, 0.7, 2.0, 1.1], "b": [0.3, -0.2, 0.9, 0.0, 0.4]}"#;
    let r = json_out(&run(&["response", "--T", "4"], doc));
    let input = format!(r#"{{"response": {}}}"#, r["values"]);
    let v = json_out(&run(&["recover"], &input));
    let a: Vec<f64> = v["a"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let b: Vec<f64> = v["b"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in a.iter().zip([1.5, 0.7, 2.0]) {
        assert!((got - want).abs() < 1e-10);
    }
    for (got, want) in b.iter().zip([0.3, -0.2, 0.9]) {
        assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn invalid_response_exits_with_validation_code() {
    let out = run(&["recover"], r#"{"response": [1, 2, 0]}"#);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["schema"], "jacobi-bc/1");
    assert_eq!(err["error"]["kind"], "not_a_response_vector");
    assert!(err["error"]["message"].as_str().unwrap().contains("not a response vector"));
}

#[test]
fn bad_input_is_a_validation_error() {
    assert_eq!(run(&["recover"], "{oops").status.code(), Some(2));
    assert_eq!(run(&["response", "--T", "3"], r#"{"a": [1, -1], "b": [0, 0]}"#).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--z", "i", "--T", "2", "--points", "0"], GEOMETRIC).status.code(), Some(2));
}

#[test]
fn diagnose_geometric_chain() {
    let v = json_out(&run(&["diagnose", "--N-max", "20"], GEOMETRIC));
    assert_eq!(v["verdict"], "LikelyIndeterminate");
    let free = json_out(&run(&["diagnose", "--N-max", "20"], r#"{"generator": {"kind": "free"}}"#));
    assert_eq!(free["verdict"], "LikelyDeterminate");
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let args = |t: &'static str| vec!["connect", "--method", "gram", "--T", "12", "--threads", t];
    let one = run(&args("1"), GEOMETRIC);
    let four = run(&args("4"), GEOMETRIC);
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let d1 = run(&["diagnose", "--N-max", "16", "--threads", "1"], GEOMETRIC);
    let d2 = run(&["diagnose", "--N-max", "16", "--threads", "3"], GEOMETRIC);
    assert_eq!(d1.stdout, d2.stdout);
}

#[test]
fn connect_methods_agree() {
    let doc = r#"{"a": [1, 1.2, 0.8, 1.5, 0.9, 1.1, 1.3], "b": [0.1, -0.4, 0.2, 0.0, 0.3, -0.1, 0.2]}"#;
    let matrices: Vec<Value> = ["response", "gram", "spectrum", "hankel"]
        .iter()
        .map(|m| json_out(&run(&["connect", "--method", m, "--T", "4", "--N", "6", "--orientation", "top"], doc)))
        .collect();
    for m in &matrices[1..] {
        assert_eq!(m["orientation"], "corner_top");
        for i in 0..4 {
            for j in 0..4 {
                let x = m["matrix"][i][j].as_f64().unwrap();
                let y = matrices[0]["matrix"][i][j].as_f64().unwrap();
                assert!((x - y).abs() < 1e-9, "{i},{j}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn csv_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = run(
        &["connect", "--T", "3", "--format", "csv", "--output", path.to_str().unwrap()],
        r#"{"response": [1, 0, 1, 0, 2]}"#,
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# orientation: corner_bottom\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn moments_conversion_and_env_precision() {
    let out = Command::new(env!("CARGO_BIN_EXE_jacobi-bc"))
        .args(["moments", "--to", "moments"])
        .env("JACOBI_BC_PRECISION", "rational")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .and_then(|mut c| {
            c.stdin.take().unwrap().write_all(br#"{"response": [1, 0, 0, 0, 0]}"#)?;
            c.wait_with_output()
        })
        .unwrap();
    let v = json_out(&out);
    let s: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(s, vec![1.0, 0.0, 1.0, 0.0, 2.0]);
}

#[test]
fn simulate_impulse() {
    let v = json_out(&run(&["simulate", "--T", "3"], r#"{"generator": {"kind": "free"}, "control": [1, 0, 0]}"#));
    assert_eq!(v["re"][1][1], 1.0);
    assert_eq!(v["re"][2][2], 1.0);
    assert_eq!(v["re"][1][2], 0.0);
}

#[test]
fn hb_function_at_i_for_first_horizon() {
    let v = json_out(&run(&["hb", "--T", "1", "--points", "0,1"], r#"{"generator": {"kind": "free"}}"#));
    let re = v["points"][0]["value"][0].as_f64().unwrap();
    assert!((re - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    assert!(v["hb_violations"].as_array().unwrap().is_empty());
}
