use std::process::Command;

use serde_json::{Map, Value};

fn qh(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qh"))
        .args(args)
        .env_remove("QH_TOL_QUAD")
        .env_remove("QH_TOL_ODE")
        .env_remove("QH_FD_STEP")
        .output()
        .expect("qh runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn record(text: &str) -> Map<String, Value> {
    match serde_json::from_str(text).expect("json output") {
        Value::Object(m) => m,
        other => panic!("not an object: {other}"),
    }
}

fn num(m: &Map<String, Value>, key: &str) -> f64 {
    m[key].as_f64().unwrap_or_else(|| panic!("{key} missing"))
}

#[test]
fn eval_v_two_centre_point() {
    let (code, out) = qh(&["eval-v", "--betas", "1,1,0", "--c", "1", "--point", "0,0,2"]);
    assert_eq!(code, 0);
    let m = record(&out);
    assert!((num(&m, "results.V") + 3f64.ln()).abs() < 1e-10);
    assert!((num(&m, "results.H") - 4.0).abs() < 1e-12);
    assert!((num(&m, "results.Vhat") + 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(m["checks.quadric_residual.passed"], Value::Bool(true));
}

#[test]
fn eguchi_hanson_closed_form() {
    let (code, out) = qh(&["eguchi-hanson", "--a", "1", "--point", "0,0,2"]);
    assert_eq!(code, 0);
    let m = record(&out);
    assert!((num(&m, "results.V") + 3f64.ln()).abs() < 1e-12);
    assert!((num(&m, "results.Vhat") - 4.0 / 3.0).abs() < 1e-12);

    let (code, out) = qh(&["eguchi-hanson", "--a", "2", "--point", "1,0,3"]);
    assert_eq!(code, 0);
    assert!(num(&record(&out), "results.relative_difference") < 1e-8);
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    let args = ["twistor", "--point", "0.3,-0.2,0.5"];
    let strip = |s: &str| {
        let mut m = record(s);
        m.remove("timing_ms");
        m.remove("version");
        m
    };
    let (_, a) = qh(&args);
    let (_, b) = qh(&args);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn exit_codes() {
    assert_eq!(qh(&["--help"]).0, 0);
    assert_eq!(qh(&["--version"]).0, 0);
    assert_eq!(qh(&["eval-v", "--betas", "x", "--point", "0,0,1"]).0, 1);
    assert_eq!(qh(&["no-such-command"]).0, 1);
    assert_eq!(qh(&["eval-v", "--betas", "1,1,0", "--point", "0,1"]).0, 1);
    let (code, out) = qh(&["eguchi-hanson", "--point", "0,0,2", "--tol", "1e-30"]);
    assert_eq!(code, 2);
    assert_eq!(record(&out)["passed"], Value::Bool(false));
    // the focal segment of the two-centre example
    assert_eq!(qh(&["eguchi-hanson", "--point", "0,0,0.5"]).0, 2);
}

#[test]
fn csv_output() {
    let (code, out) = qh(&["euler-flow", "--w0", "1,2,3", "--format", "csv", "--samples", "4"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "s,w1,w2,w3,H,A,B");
    assert_eq!(lines.len(), 5);
    let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(&first[..4], &[0.0, 1.0, 2.0, 3.0]);
    assert!((first[5] + 8.0).abs() < 1e-12);
}

#[test]
fn tolerance_flags_override_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qh"))
        .args(["eval-v", "--betas", "1,1,0", "--point", "0,0,2", "--tol-quad", "1e-9"])
        .env("QH_TOL_QUAD", "1e-7")
        .env("QH_TOL_ODE", "1e-8")
        .output()
        .unwrap();
    let m = record(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(num(&m, "inputs.tol_quad"), 1e-9);
    assert_eq!(num(&m, "inputs.tol_ode"), 1e-8);
    assert_eq!(num(&m, "inputs.fd_step"), 1e-4);
    let bad = Command::new(env!("CARGO_BIN_EXE_qh"))
        .args(["eval-v", "--betas", "1,1,0", "--point", "0,0,2"])
        .env("QH_FD_STEP", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn suite_single_criterion() {
    let (code, out) = qh(&["suite", "--quick", "--only", "1"]);
    assert_eq!(code, 0);
    let m = record(&out);
    assert_eq!(m["results.criterion_01.passed"], Value::Bool(true));
}
