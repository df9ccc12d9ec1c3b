use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use subscan::io::load_matrix;
use subscan::selector::{select, ScanMethod};

fn subscan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subscan"))
        .args(args)
        .env_remove("SUBSCAN_THREADS")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn classify_reports_thresholds_and_regime() {
    let out = subscan(&["classify", "--N", "1000", "--M", "1000", "--n", "10", "--m", "10", "--a", "1"]);
    let doc = json_stdout(&out);
    let t = &doc["result"]["basis"]["thresholds"];
    assert!((t["B"].as_f64().unwrap() - 0.5396209475663823).abs() < 1e-9);
    assert!((t["A"].as_f64().unwrap() - 0.7367958349360186).abs() < 1e-9);
    assert_eq!(doc["result"]["selection"], "inconsistent");
    assert_eq!(doc["tool"], "subscan");
    assert!(doc["version"].is_string());
}

#[test]
fn selftest_passes() {
    let out = subscan(&["selftest"]);
    let doc = json_stdout(&out);
    assert_eq!(doc["result"]["failed"], 0);
}

#[test]
fn invalid_dims_are_usage_errors() {
    let out = subscan(&["classify", "--N", "5", "--M", "5", "--n", "6", "--m", "0", "--a", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).expect("JSON error report");
    let details = err["details"].to_string();
    assert!(details.contains('n') && details.contains('m'), "{details}");
}

#[test]
fn generate_then_select_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = (path(dir.path(), "y.csv"), path(dir.path(), "y.json"));
    let gen = subscan(&[
        "generate", "--N", "12", "--M", "10", "--n", "2", "--m", "3", "--a", "2.5", "--rows", "4,7", "--cols", "0,5,9",
        "--seed", "9", "--matrix", &csv, "--meta", &meta,
    ]);
    json_stdout(&gen);
    let sel = json_stdout(&subscan(&["select", "--matrix", &csv, "--meta", &meta, "--method", "exact"]));

    let (y, m) = load_matrix(Path::new(&csv), Path::new(&meta)).unwrap();
    let expected = select(&y, 2, 3, &ScanMethod::exact(), 1).unwrap();
    assert_eq!(sel["result"]["support"], serde_json::to_value(&expected.support).unwrap());
    assert_eq!(sel["result"]["objective"].as_f64().unwrap(), expected.objective);
    assert_eq!(sel["planted"], serde_json::to_value(m.support.unwrap()).unwrap());
}

#[test]
fn mismatched_meta_is_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = (path(dir.path(), "y.csv"), path(dir.path(), "y.json"));
    json_stdout(&subscan(&[
        "generate", "--N", "6", "--M", "6", "--n", "2", "--m", "2", "--a", "1", "--matrix", &csv, "--meta", &meta,
    ]));
    let (csv2, meta2) = (path(dir.path(), "z.csv"), path(dir.path(), "z.json"));
    json_stdout(&subscan(&[
        "generate", "--N", "7", "--M", "6", "--n", "2", "--m", "2", "--a", "1", "--matrix", &csv2, "--meta", &meta2,
    ]));
    let out = subscan(&["select", "--matrix", &csv, "--meta", &meta2]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "run.toml");
    std::fs::write(&cfg, "N = 10\nM = 10\nn = 2\nm = 2\na = 1.0\ntrials = 100\nseed = 4\n").unwrap();
    let from_file = json_stdout(&subscan(&["risk", "--config", &cfg]));
    assert_eq!(from_file["result"]["trials"], 100);
    let overridden = json_stdout(&subscan(&["risk", "--config", &cfg, "--trials", "50"]));
    assert_eq!(overridden["result"]["trials"], 50);
    assert_eq!(overridden["config"]["trials"], 50);
    assert_eq!(overridden["config"]["seed"], 4);
}

#[test]
fn echoed_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = path(dir.path(), "first.json");
    let out = subscan(&[
        "sweep", "--N", "12", "--M", "12", "--n", "2", "--m", "2", "--mult", "0.5,1,2", "--trials", "40", "--seed", "3",
        "--out", &first,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let second = path(dir.path(), "second.json");
    let out = subscan(&["sweep", "--config", &first, "--out", &second]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let read = |p: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let (before, again) = (read(&first), read(&second));
    assert_eq!(before["result"], again["result"]);
    assert_eq!(before["config"]["seed"], again["config"]["seed"]);
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "sweep.csv");
    json_stdout(&subscan(&[
        "sweep", "--N", "10", "--M", "10", "--n", "2", "--m", "2", "--mult", "0.5,2", "--trials", "20", "--csv", &csv,
    ]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,multiplier,risk,ci_low,ci_high,mean_overlap,trials"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn thread_env_does_not_change_results() {
    let args = ["risk", "--N", "14", "--M", "14", "--n", "2", "--m", "2", "--a", "2", "--trials", "30"];
    let one = Command::new(env!("CARGO_BIN_EXE_subscan")).args(args).env("SUBSCAN_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_subscan")).args(args).env("SUBSCAN_THREADS", "4").output().unwrap();
    assert_eq!(json_stdout(&one)["result"], json_stdout(&four)["result"]);
    let zero = Command::new(env!("CARGO_BIN_EXE_subscan")).args(args).env("SUBSCAN_THREADS", "0").output().unwrap();
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn calibrate_then_detect() {
    let dir = tempfile::tempdir().unwrap();
    let (cal, csv, meta) = (path(dir.path(), "cal.json"), path(dir.path(), "y.csv"), path(dir.path(), "y.json"));
    let out = subscan(&[
        "calibrate", "--N", "10", "--M", "10", "--n", "2", "--m", "2", "--trials", "2000", "--out", &cal,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    json_stdout(&subscan(&[
        "generate", "--N", "10", "--M", "10", "--n", "2", "--m", "2", "--a", "8", "--matrix", &csv, "--meta", &meta,
    ]));
    let doc = json_stdout(&subscan(&["detect", "--calibration", &cal, "--matrix", &csv, "--meta", &meta]));
    assert_eq!(doc["reject"], true);
    assert!(doc["scan_value"].as_f64().unwrap() > doc["thresholds"]["scan_crit"].as_f64().unwrap());
}
