use std::process::{Command, Output};

use serde_json::Value;
use zfx_core::bounds::ColoringOracle;

fn zfx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zfx")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = zfx(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn stepup_parity_report() {
    let r = json(&["verify-stepup", "--N", "16", "--k", "3", "--f2", "parity", "--mode", "exhaustive"]);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["config"]["command"], "verify-stepup");
    let report = &r["result"]["report"];
    assert!(report["worst_eps"].as_f64().unwrap() <= report["bound_eps"].as_f64().unwrap());
    assert!(r["guard_limits"]["exhaustive_supports"].is_u64());
    assert!(r.get("wall_time_s").is_none());
}

#[test]
fn exit_codes() {
    // missing seed on a randomized path
    assert_eq!(zfx(&["search-f2", "--p", "3", "--k", "2", "--d", "3"]).status.code(), Some(1));
    assert_eq!(zfx(&["verify-stepup", "--N", "16", "--k", "2"]).status.code(), Some(1));
    assert_eq!(zfx(&["verify-stepup", "--N", "64", "--k", "5"]).status.code(), Some(2));
    let fail = zfx(&["search-f2", "--p", "3", "--k", "2", "--d", "3", "--m", "1", "--eps", "0.15", "--seed", "7"]);
    assert_eq!(fail.status.code(), Some(3));
    assert_eq!(zfx(&["disperser-check", "--N", "8", "--k", "2", "--l", "2"]).status.code(), Some(0));
    assert_eq!(zfx(&["--version"]).status.code(), Some(0));
}

#[test]
fn guard_override_lifts_limit() {
    let low = Command::new(env!("CARGO_BIN_EXE_zfx")).args(["verify-stepup", "--N", "64", "--k", "5"]).output().unwrap();
    assert_eq!(low.status.code(), Some(2));
    let high = Command::new(env!("CARGO_BIN_EXE_zfx"))
        .args(["verify-stepup", "--N", "64", "--k", "5", "--mode", "sampled", "--samples", "20", "--seed", "1"])
        .env("ZFX_GUARD_OVERRIDE", "100000000")
        .output()
        .unwrap();
    assert_eq!(high.status.code(), Some(0), "{}", String::from_utf8_lossy(&high.stderr));
    let r: Value = serde_json::from_slice(&high.stdout).unwrap();
    assert_eq!(r["guard_limits"]["override_value"], 100000000);
}

#[test]
fn floats_carry_17_digits() {
    let out = zfx(&["verify-stepup", "--N", "16", "--k", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"residual_mean\"")).unwrap();
    let mantissa = line.split(':').nth(1).unwrap().trim().trim_end_matches(',').split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{line}");
}

#[test]
fn identical_config_identical_bytes() {
    let args = ["verify-shift", "--N", "20", "--k", "6", "--l", "2", "--seed", "3", "--mode", "sampled", "--samples", "300"];
    let a = zfx(&args).stdout;
    let b = zfx(&[&args[..], &["--workers", "3"]].concat()).stdout;
    assert_eq!(a, b);
}

#[test]
fn csv_output_has_header_and_row() {
    let out = zfx(&["verify-stepup", "--N", "16", "--k", "4", "--format", "csv"]);
    let mut rd = csv::Reader::from_reader(&out.stdout[..]);
    let headers = rd.headers().unwrap().clone();
    assert_eq!(&headers[0], "command");
    assert!(headers.iter().any(|h| h == "report.worst_eps"));
    let rows: Vec<_> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1], "ok");
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = ["color-shift", "--N", "12", "--l", "2"];
    let out = zfx(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), zfx(&args).stdout);
}

#[test]
fn coloring_export_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    let r = json(&["color-shift", "--N", "12", "--l", "3", "--export", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 220);
    let colors = r["result"]["color_count"].as_u64().unwrap();
    for line in text.lines() {
        let (set, color) = line.split_once(" -> ").unwrap();
        assert_eq!(set.split(',').count(), 3);
        assert!((1..=colors).contains(&color.parse().unwrap()));
    }
}

#[test]
fn oracle_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.txt");
    let phi = ColoringOracle::adversarial(48, 3, 2).unwrap();
    std::fs::write(&path, phi.to_file_string().unwrap()).unwrap();
    let base = ["upper-bound", "--N", "48", "--k", "3", "--m", "2"];
    let a = json(&[&base[..], &["--oracle", "adversarial"]].concat());
    let b = json(&[&base[..], &["--oracle", "file", "--oracle-file", path.to_str().unwrap()]].concat());
    assert_eq!(a["result"]["run"], b["result"]["run"]);
    assert_eq!(a["result"]["ceiling"], b["result"]["ceiling"]);
    assert_eq!(b["result"]["oracle"], "file");
    assert_eq!(zfx(&[&base[..], &["--oracle", "file"]].concat()).status.code(), Some(1));
}

#[test]
fn sweep_empty_range() {
    let r = json(&["sweep", "--template", "verify-shift", "--vary", "k=7..5", "--N", "14", "--l", "2", "--seed", "1"]);
    assert_eq!(r["result"]["points"].as_array().unwrap().len(), 0);
}

#[test]
fn sweep_records_partial_failures() {
    let r = json(&["sweep", "--template", "verify-stepup", "--vary", "k=4..6", "--N", "64", "--mode", "sampled", "--samples", "50", "--seed", "3"]);
    let points = r["result"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(points[0]["status"], "ok");
    assert_eq!(points[2]["exit_code"], 2);
    assert_eq!(r["result"]["failures"], 2);
}

#[test]
fn sweep_residual_trend() {
    let r = json(&["sweep", "--template", "verify-shift", "--vary", "k=4..10", "--N", "24", "--l", "2", "--mode", "sampled", "--samples", "200", "--seed", "5"]);
    let trends = r["result"]["summary"].as_array().unwrap();
    let row = trends.iter().find(|t| t["metric"] == "report.residual_max").expect("residual trend row");
    assert_eq!(row["values"].as_array().unwrap().len(), 7);
    assert_eq!(row["trend"], "nonincreasing");
}

#[test]
fn sweep_color_budget_trace() {
    let r = json(&["sweep", "--template", "color-shift", "--vary", "l=2..4", "--N", "10000", "--mode", "sampled", "--samples", "1000", "--seed", "2"]);
    for p in r["result"]["points"].as_array().unwrap() {
        let res = &p["result"];
        assert_eq!(res["monochromatic_edges"], 0);
        assert_eq!(res["color_count"], *res["budgets"].as_array().unwrap().last().unwrap());
    }
}
