//! End-to-end tests of the command-line interface: output contracts,
//! determinism and exit codes.

use std::process::{Command, Output};

fn focksim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focksim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8")
}

#[test]
fn fidelity_defaults_match_single_detector_run() {
    let out = focksim(&["fidelity"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().expect("header");
    assert!(header.starts_with("p1,p2,theta_cos"));
    let row = lines.next().expect("row");
    assert!(row.contains("10/39"), "row: {row}");
    assert!(row.contains("29/10"), "row: {row}");
}

#[test]
fn fidelity_no_click_limit() {
    let out = focksim(&["fidelity", "--eta-c-sq", "1", "--y-policy", "no-click"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains(",1/2,"));
}

#[test]
fn invalid_order_is_config_error() {
    let out = focksim(&["fidelity", "--order", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).expect("utf8");
    assert!(err.contains("order"), "stderr: {err}");
}

#[test]
fn degrees_forces_float_mode() {
    let out = focksim(&["fidelity", "--theta-degrees", "30"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains(",float,"));
    // explicitly demanding exact mode with a degrees angle cannot work
    let out = focksim(&["fidelity", "--theta-degrees", "30", "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_eta_is_monotone() {
    let out = focksim(&[
        "scan",
        "--sweep",
        "eta-c-sq",
        "--values",
        "1/10,1/2,95/100",
        "--y-policy",
        "no-click",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let fidelities: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(12).expect("fidelity column").parse().expect("decimal"))
        .collect();
    assert_eq!(fidelities.len(), 3);
    assert!(fidelities[0] < fidelities[1] && fidelities[1] < fidelities[2]);
}

#[test]
fn scan_cascade_size_with_perfect_detectors() {
    // with perfect cascade detectors the only vacuum source is two-photon
    // bunching, so the fidelity climbs as n/(n+1)
    let out = focksim(&[
        "scan",
        "--sweep",
        "cascade_n",
        "--values",
        "1,2,3,4",
        "--eta-c-sq",
        "1",
        "--y-policy",
        "no-click",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let exact: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(11).expect("fidelity_exact column"))
        .collect();
    assert_eq!(exact, vec!["1/2", "2/3", "3/4", "4/5"]);
}

#[test]
fn scan_empty_values_prints_header_only() {
    let out = focksim(&["scan", "--sweep", "p1", "--values", ""]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("p1,p2,"));
}

#[test]
fn scan_is_byte_deterministic() {
    let args = [
        "scan",
        "--sweep",
        "eta-c-sq",
        "--values",
        "1/10,1/2",
        "--order",
        "3",
    ];
    let a = focksim(&args);
    let b = focksim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pdc_stats_trial_columns() {
    let out = focksim(&["pdc-stats", "--p", "1/100", "--n-max", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("distinguishability_trials,80000,"), "{text}");
    assert!(text.contains("expected_trials,10000,"), "{text}");
    // the scaled statistical distance approaches one for weak sources
    let scaled: f64 = text
        .lines()
        .find(|l| l.starts_with("scaled_by_8_over_p_sq"))
        .and_then(|l| l.split(',').nth(1))
        .expect("summary line")
        .parse()
        .expect("decimal");
    assert!((scaled - 1.0).abs() < 0.05, "scaled = {scaled}");
}

#[test]
fn matrix_blocks_by_order() {
    let out = focksim(&["matrix"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let keys: Vec<&String> = doc.as_object().expect("object").keys().collect();
    assert_eq!(keys, vec!["(1,1)", "(2,0)"]);

    let out = focksim(&["matrix", "--order", "3"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let keys: Vec<&String> = doc.as_object().expect("object").keys().collect();
    assert_eq!(keys, vec!["(1,1)", "(1,2)", "(2,0)", "(2,1)", "(3,0)"]);
}

#[test]
fn matrix_is_byte_deterministic() {
    let a = focksim(&["matrix", "--order", "3", "--theta-cos", "3/5", "--theta-sin", "4/5"]);
    let b = focksim(&["matrix", "--order", "3", "--theta-cos", "3/5", "--theta-sin", "4/5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("focksim-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("tempdir");
    let path = dir.join("run.json");
    std::fs::write(
        &path,
        r#"{
            "p1": [1, 100],
            "p2": "1/100",
            "theta": {"cos_num": 3, "cos_den": 5, "sin_num": 4, "sin_den": 5},
            "eta_c_sq": [1, 10],
            "cascade_n": 1,
            "y_policy": "trace",
            "order": 2,
            "mode": "exact"
        }"#,
    )
    .expect("write config");
    let out = focksim(&["fidelity", "--config", path.to_str().expect("path")]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("10/39"));
    // flags win over the file
    let out = focksim(&[
        "fidelity",
        "--config",
        path.to_str().expect("path"),
        "--eta-c-sq",
        "1",
        "--y-policy",
        "no-click",
    ]);
    assert!(stdout(&out).contains(",1/2,"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = std::env::temp_dir().join(format!("focksim-cli-badkey-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("tempdir");
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"{"pp1": [1, 100]}"#).expect("write config");
    let out = focksim(&["fidelity", "--config", path.to_str().expect("path")]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_filter_and_fault_injection() {
    // the threshold checks pass
    let out = focksim(&["verify", "--filter", "threshold"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("threshold-four-detectors"));
    assert!(!text.contains("FAIL"));

    // a perturbed reference constant must turn the suite red
    let out = focksim(&[
        "verify",
        "--filter",
        "second-order-formula-vs-sim n=1",
        "--inject-fault",
        "second-order-bracket",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // unknown fault names are configuration errors
    let out = focksim(&["verify", "--inject-fault", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}
