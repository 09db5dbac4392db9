mod common;

use common::fixture;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensor-select"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn select_scalar() {
    let o = cli(&["select", &path("scalar_two_sensor.json"), "-s", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selected: [1]"), "{}", stdout(&o));
}

#[test]
fn select_zero_budget_is_usage_error() {
    let o = cli(&["select", &path("scalar_two_sensor.json"), "-s", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_budget_above_p_is_input_error() {
    let o = cli(&["select", &path("scalar_two_sensor.json"), "-s", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_json_matches_library() {
    let o = cli(&["--json", "select", &path("tracking_6.json"), "-s", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let model = sensor_select::SystemModel::load(fixture("tracking_6.json")).unwrap();
    let st = sensor_select::build_stacked(&model).unwrap();
    let f = sensor_select::mse(&st, &sensor_select::SensorSet::full(6)).unwrap().f;
    let steps = doc["steps"].as_array().unwrap();
    let last = steps.last().unwrap()["f_after"].as_f64().unwrap();
    assert!((last - f).abs() <= 1e-9 * f.max(1.0));
    assert_eq!(doc["selected"].as_array().unwrap().len(), 6);
}

#[test]
fn bounds_scalar() {
    let o = cli(&["bounds", &path("scalar_two_sensor.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.333333"), "{text}");
    assert!(text.contains("0.888889"), "{text}");
}

#[test]
fn bounds_zero_output_json() {
    let o = cli(&["--json", "bounds", &path("zero_output.json")]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["gamma_lower"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["coeff_ours"].as_f64().unwrap(), 1.0);
    let chamon = doc["coeff_chamon"].as_f64().unwrap();
    assert!((chamon - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["bounds".to_string(), "/nonexistent/model.json".to_string()],
        vec!["bounds".to_string(), path("corrupted.json")],
        vec!["bounds".to_string(), path("nonpositive_noise.json")],
        vec![
            "verify".to_string(),
            path("corrupted.json"),
            "-s".to_string(),
            "1".to_string(),
        ],
        vec!["frobnicate".to_string()],
    ] {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = cli(&refs);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn verify_fixtures() {
    let o = cli(&[
        "verify",
        &path("small_random.json"),
        "-s",
        "2",
        "--trials",
        "3000",
        "--seed",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = cli(&["verify", &path("p10.json"), "-s", "3", "--trials", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("exact ratios skipped"));
}

#[test]
fn verify_json_parses() {
    let o = cli(&[
        "--json",
        "--threads",
        "2",
        "verify",
        &path("scalar_two_sensor.json"),
        "-s",
        "1",
        "--trials",
        "500",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn sweep_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = cli(&["sweep", &path("smoke_sweep.json"), "--output", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let records = sensor_select::experiments::read_sweep_csv(&a).unwrap();
    assert_eq!(records.len(), 41);
    assert!(sensor_select::experiments::metadata_path(&a).exists());

    let c = dir.path().join("c.csv");
    let o = cli(&[
        "sweep",
        &path("smoke_sweep.json"),
        "--output",
        c.to_str().unwrap(),
        "--seed",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(std::fs::read(&c).unwrap(), text);
}

#[test]
fn in_process_run() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = sensor_select::cli::run(
        ["sensor-select", "select", &path("small_random.json"), "-s", "2"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("selected: ["));
}
