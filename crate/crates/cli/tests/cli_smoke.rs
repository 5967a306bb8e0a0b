//! End-to-end checks of the binary: exit codes, config files, report
//! files, and byte-level reproducibility modulo the timing field.

use std::path::Path;
use std::process::{Command, Output};

fn markerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_markerlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn exit_zero_on_clean_suite() {
    let out = markerlab(&[
        "bench",
        "freeness",
        "--system",
        "odo",
        "--seed",
        "5",
        "--set",
        "samples=50",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let doc = json_of(&out);
    assert_eq!(doc["pass"], serde_json::json!(true));
}

#[test]
fn exit_one_on_violation() {
    let out = markerlab(&[
        "bench",
        "freeness",
        "--system",
        "cyc:5",
        "--set",
        "samples=20",
        "--set",
        "freeness_window=6",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json_of(&out);
    assert_eq!(doc["pass"], serde_json::json!(false));
    assert!(doc["violations"].as_array().unwrap().len() > 0);
}

#[test]
fn exit_sixtyfour_on_config_error() {
    for args in [
        vec!["bench", "freeness", "--set", "window=-4"],
        vec!["bench", "nosuchsuite"],
        vec!["bench", "freeness", "--set", "wat=1"],
        vec!["bench", "freeness", "--system", "wat:9"],
    ] {
        let out = markerlab(&args);
        assert_eq!(out.status.code(), Some(64), "args {args:?}");
    }
}

#[test]
fn exit_two_on_degenerate_run() {
    // Product-odometer strata for the T^2 stage always have index
    // magnitude at least 2, so a stage bound of 1 starves every in-seed
    // query and nothing resolves.
    let out = markerlab(&[
        "rok2d",
        "--n",
        "2",
        "--m",
        "3",
        "--system",
        "podo",
        "--jmax",
        "1",
        "--set",
        "samples=40",
    ]);
    let doc = json_of(&out);
    assert_eq!(out.status.code(), Some(2), "{:?}", doc);
    assert_eq!(doc["resolved_count"], serde_json::json!(0));
    assert!(doc["unknown_count"].as_u64().unwrap() > 0);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = std::env::temp_dir().join("markerlab_cli_smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.cfg");
    std::fs::write(&cfg_path, "system = odo\nsamples = 30\nseed = 9\n").unwrap();
    let report_path = dir.join("report.json");
    let out = markerlab(&[
        "bench",
        "freeness",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // The flag beat the file.
    assert_eq!(doc["params"]["seed"], serde_json::json!(11));
    assert_eq!(doc["params"]["samples"], serde_json::json!(30));
}

#[test]
fn reports_reproducible_modulo_timing() {
    let args = [
        "bench",
        "markers1d",
        "--system",
        "odo",
        "--seed",
        "3",
        "--set",
        "samples=60",
    ];
    let mut docs = Vec::new();
    for _ in 0..2 {
        let out = markerlab(&args);
        assert_eq!(out.status.code(), Some(0));
        let mut doc = json_of(&out);
        doc.as_object_mut().unwrap().remove("wall_ms");
        docs.push(doc);
    }
    assert_eq!(docs[0], docs[1]);
}

#[test]
fn cob_eval_prints_exact_rationals() {
    let out = markerlab(&["cob", "eval", "--x", "lat:0:0,0", "--rmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["f"], serde_json::json!("61/192"));
    assert_eq!(doc["f1"], serde_json::json!("1/4"));
}

#[test]
fn cob_sweep_trace_csv() {
    let out = markerlab(&[
        "cob",
        "sweep",
        "--dir",
        "S",
        "--len",
        "12",
        "--trace-from",
        "lat:0:0,0",
        "--set",
        "format=csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,running_sum_p,running_sum_q,levels"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12, "one row per resolved step");
    assert!(rows[0].starts_with("0,61,192,"), "first row {}", rows[0]);
}

#[test]
fn bad_point_literal_is_config_error() {
    let out = markerlab(&["cob", "eval", "--x", "lat:0:zz", "--rmax", "2"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(!Path::new("lat:0:zz").exists());
    // Wrong point kind for the system is a config error as well.
    let out = markerlab(&["cob", "eval", "--x", "line:0:5", "--rmax", "2"]);
    assert_eq!(out.status.code(), Some(64));
}
