use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperjacobi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(text.trim().lines().count(), 1, "one-line error: {text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn phi_row_at_the_closed_form_point() {
    let o = run(&["eval", "phi", "--alpha", "0.5", "--beta", "-0.5", "--lambda", "2", "--t", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "t,re,im\n1,0.386869,0\n");
}

#[test]
fn phi_is_one_at_the_origin() {
    let o = run(&["eval", "phi", "--alpha", "1.3", "--beta", "0.2", "--lambda", "3,0.5", "--t", "0"]);
    assert_eq!(stdout(&o), "t,re,im\n0,1,0\n");
}

#[test]
fn c_function_at_minus_i_rho() {
    let o = run(&["eval", "c", "--alpha", "0.5", "--beta", "-0.5", "--lambda-im", "-1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "re,im\n1,0\n");
}

#[test]
fn tolerance_sets_printed_digits() {
    let o = run(&["eval", "phi", "--alpha", "0.5", "--beta", "-0.5", "--lambda", "2", "--t", "1", "--tol", "1e-3"]);
    assert_eq!(stdout(&o), "t,re,im\n1,0.387,0\n");
}

#[test]
fn several_points_and_json_output() {
    let o = run(&[
        "eval", "delta-weight", "--alpha", "0.5", "--beta", "-0.5", "--t", "0,1,2", "--out", "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let w = rows[1]["re"].as_f64().unwrap();
    assert!((w - (2.0 * 1f64.sinh()).powi(2)).abs() < 1e-12, "{w}");
}

#[test]
fn domain_error_exits_two() {
    let o = run(&["eval", "Phi", "--alpha", "1", "--beta", "0", "--lambda", "3", "--t", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["code"], "domain");
    assert!(e["message"].as_str().unwrap().contains("t > 0"));
    assert!(e["context"].is_object());
}

#[test]
fn bad_parameters_and_usage() {
    let o = run(&["eval", "phi", "--alpha", "-2", "--beta", "0", "--lambda", "1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["code"], "domain");
    let o = run(&["eval", "phi", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(64));
    assert_eq!(stderr_json(&o)["code"], "usage");
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn missing_file_exits_sixty_five() {
    let o = run(&["transform", "--alpha", "1", "--beta", "0", "--input", "/nonexistent/f.csv", "--t", "1"]);
    assert_eq!(o.status.code(), Some(65));
}

#[test]
fn verify_is_deterministic_in_the_seed() {
    let args = ["verify", "strict-bound", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(report["suite"], "strict-bound");
    assert_eq!(report["pass"], true);
    assert!(report["max_err"].is_number());
}

#[test]
fn furstenberg_report_on_a_symmetric_pair() {
    let dir = tempfile::tempdir().unwrap();
    let measure = dir.path().join("pair.json");
    std::fs::write(&measure, r#"{"atom0":[0,0],"atoms":[[1.0,1.0,0.0]]}"#).unwrap();
    let o = run(&[
        "furstenberg",
        "--alpha", "0.5", "--beta", "-0.5", "--lambda", "2",
        "--measure", measure.to_str().unwrap(),
        "--steps", "3", "--probes", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let steps = r["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 4);
    assert_eq!(steps[3]["valid_tmax"], 5.0);
    let m = r["probes"][0]["muhat"][0].as_f64().unwrap();
    assert!((m - 0.386869).abs() < 1e-6);
    assert_eq!(r["flatness_strictly_decreasing"], true);
    assert_eq!(r["conditions"]["satisfied"], true);
}

#[test]
fn convolve_writes_valid_range_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    let mut csv = String::from("t,re,im\n");
    for i in 0..=40 {
        let t = i as f64 * 0.1;
        csv += &format!("{t},{},0\n", (-t * t).exp());
    }
    std::fs::write(&input, csv).unwrap();
    let measure = dir.path().join("dirac.json");
    std::fs::write(&measure, r#"{"atom0":[1,0],"atoms":[]}"#).unwrap();
    let sidecar = dir.path().join("side.json");
    let o = run(&[
        "convolve", "--alpha", "1", "--beta", "0",
        "--input", input.to_str().unwrap(),
        "--measure", measure.to_str().unwrap(),
        "--sidecar", sidecar.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 42);
    assert_eq!(lines[1], "0,1,0");
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(side["valid_tmax"], 4.0);
}
