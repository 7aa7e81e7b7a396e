use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use volterra_picard::runner::strip_wall_time;

fn picard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picard")).args(args).output().expect("spawn picard")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_report(dir: &Path) -> (String, Value) {
    let text = fs::read_to_string(dir.join("report.json")).unwrap();
    let v = serde_json::from_str(&text).unwrap();
    (text, v)
}

const REPORT_KEYS: [&str; 8] =
    ["term_norms", "majorants", "ratios", "certified_tail", "residual", "oracle_gap", "wall_time", "converged"];

#[test]
fn unknown_scenario_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bogus.json", r#"{"scenario": "bogus"}"#);
    let out = picard(&["solve", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`scenario`"), "{err}");
}

#[test]
fn unreadable_config_exits_2() {
    let out = picard(&["solve", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"scenario": "resolvent", "tol": 0}"#);
    let out = picard(&["solve", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`tol`"));
}

#[test]
fn resolvent_run_matches_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let body = format!(
        r#"{{"scenario": "resolvent", "lambda": [1, 0], "T": 1, "n_steps": 512, "tol": 1e-8, "output_dir": {:?}}}"#,
        out_dir.to_str().unwrap()
    );
    let cfg = write_config(dir.path(), "r.json", &body);
    let out = picard(&["solve", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (text, v) = read_report(&out_dir);
    for key in REPORT_KEYS {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["oracle_gap"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["converged"], Value::Bool(true));
    // 17 significant digits: one leading digit and sixteen after the point
    let gap_line = text.lines().find(|l| l.contains("\"oracle_gap\"")).unwrap();
    let mantissa = gap_line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let digits = mantissa.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(digits.len(), 17, "{mantissa}");
    let csv = fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 514);
}

#[test]
fn single_term_dyson_run_is_unconverged() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let body = format!(
        r#"{{"scenario": "dyson_constant", "n_steps": 32, "max_terms": 1, "tol": 1e-12,
            "spatial": {{"x_min": -20, "x_max": 20, "n_points": 128}}, "output_dir": {:?}}}"#,
        out_dir.to_str().unwrap()
    );
    let cfg = write_config(dir.path(), "d.json", &body);
    let out = picard(&["solve", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let (_, v) = read_report(&out_dir);
    assert_eq!(v["converged"], Value::Bool(false));
    assert_eq!(v["terms_used"], 1);
    assert!(out_dir.join("snapshot_00000.csv").exists());
    assert!(out_dir.join("snapshot_00032.csv").exists());
    let snap = fs::read_to_string(out_dir.join("snapshot_00032.csv")).unwrap();
    assert!(snap.starts_with("x,re,im,abs2\n"));
    assert_eq!(snap.lines().count(), 129);
}

#[test]
fn reports_are_reproducible_across_modes() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (k, parallel) in [false, false, true, true].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let body = format!(
            r#"{{"scenario": "hilbert_schmidt", "n_steps": 64, "seed": 11, "tol": 1e-12,
                "parallel": {parallel}, "dump_terms": true, "output_dir": {:?}}}"#,
            out_dir.to_str().unwrap()
        );
        let cfg = write_config(dir.path(), &format!("h{k}.json"), &body);
        assert_eq!(picard(&["solve", &cfg]).status.code(), Some(0));
        let (text, _) = read_report(&out_dir);
        let solution = fs::read_to_string(out_dir.join("solution.csv")).unwrap();
        let term = fs::read_to_string(out_dir.join("term_003.csv")).unwrap();
        reports.push((strip_wall_time(&text), solution, term));
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn fresnel_subcommand_prints_sweep() {
    let out = picard(&["fresnel", "--n", "2", "--schedule", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,re,im,abs_error"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][0], 1.0);
    assert!(rows.iter().all(|r| r[3] < 1e-9));
    assert!(picard(&["fresnel", "--n", "0"]).status.code() != Some(0));
}

#[test]
fn poisson_subcommand_prints_decreasing_errors() {
    let out = picard(&["poisson", "--t-list", "0.1,0.05,0.001", "--n-points", "512"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let errs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    assert_eq!(picard(&["poisson", "--t-list", "0.1,0.2"]).status.code(), Some(2));
}

#[test]
fn verify_bound_hook_fails_and_sets_exit_code() {
    let ok = picard(&["verify", "--only", "3,4"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = picard(&["verify", "--only", "3,4", "--bound-scale", "0.5"]);
    assert_eq!(bad.status.code(), Some(1));
    let table = String::from_utf8(bad.stdout).unwrap();
    assert_eq!(table.lines().filter(|l| l.contains("FAIL")).count(), 2);
}

#[test]
fn verify_reports_match_between_serial_and_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["serial_a", "serial_b", "parallel"].iter().map(|n| dir.path().join(format!("{n}.json"))).collect();
    let mut tables = Vec::new();
    for (path, parallel) in paths.iter().zip([false, false, true]) {
        let mut args = vec!["verify", "--report", path.to_str().unwrap()];
        if parallel {
            args.push("--parallel");
        }
        tables.push(picard(&args).stdout);
    }
    let texts: Vec<String> = paths.iter().map(|p| strip_wall_time(&fs::read_to_string(p).unwrap())).collect();
    assert_eq!(texts[0], texts[1]);
    assert_eq!(texts[0], texts[2]);
    assert!(tables.windows(2).all(|w| w[0] == w[1]));
    let v: Value = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 12);
}
