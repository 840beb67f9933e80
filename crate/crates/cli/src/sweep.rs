use serde::Serialize;
use serde_json::{json, Value};
use zfx_core::guard;
use zfx_core::rng::hash_words;

use crate::config::{Command, RunArgs, RunConfig};
use crate::report::{flatten, object, Report, Status};
use crate::run::run;
use crate::RunError;

/// Parameters a sweep may vary.
pub const SWEEPABLE: [&str; 9] = ["N", "k", "l", "m", "d", "p", "i", "size", "samples"];

/// `name=lo..hi` (inclusive) or `name=a,b,c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepSpec {
    pub name: String,
    pub values: Vec<u64>,
}

impl std::str::FromStr for SweepSpec {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        let bad = || RunError::Usage(format!("bad --vary spec {s:?}; expected name=lo..hi or name=a,b,c"));
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        if !SWEEPABLE.contains(&name) {
            return Err(RunError::Usage(format!("cannot vary {name:?}; choose from {SWEEPABLE:?}")));
        }
        let values = match range.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi): (u64, u64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
                (lo..=hi).collect()
            }
            None => range.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?,
        };
        Ok(SweepSpec { name: name.to_string(), values })
    }
}

fn set(args: &mut RunArgs, name: &str, v: u64) {
    let v = v as usize;
    match name {
        "N" => args.n_ground = Some(v),
        "k" => args.k = Some(v),
        "l" => args.l = Some(v),
        "m" => args.m = Some(v),
        "d" => args.d = Some(v),
        "p" => args.p = Some(v),
        "i" => args.i = Some(v),
        "size" => args.size = Some(v),
        "samples" => args.samples = v as u64,
        _ => unreachable!("checked when parsing"),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub point: Value,
    pub status: Value,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
}

fn trend(values: &[f64]) -> &'static str {
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => "constant",
        (true, false) => "nondecreasing",
        (false, true) => "nonincreasing",
        _ => "mixed",
    }
}

/// Cartesian product of the varied ranges, one run per point. Per-point
/// seeds are `hash(base seed, point values)`; failing points are recorded
/// and the sweep goes on.
pub fn sweep(template: Command, base: &RunArgs, vary: &[SweepSpec]) -> Result<Report, RunError> {
    let total: u128 = vary.iter().map(|s| s.values.len() as u128).product();
    guard::check("sweep points", total, guard::SWEEP_POINTS).map_err(RunError::Core)?;
    let mut points: Vec<Vec<u64>> = if total == 0 { Vec::new() } else { vec![Vec::new()] };
    for s in vary {
        points = points
            .into_iter()
            .flat_map(|p| s.values.iter().map(move |&v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    let exec = base.exec();
    let results: Vec<SweepPoint> = exec.map(points, |values| {
        let mut args = base.clone();
        args.workers = 1;
        for (s, &v) in vary.iter().zip(&values) {
            set(&mut args, &s.name, v);
        }
        if let Some(seed) = base.seed {
            args.seed = Some(hash_words(seed, &values));
        }
        let point = object(vary.iter().zip(&values).map(|(s, &v)| (s.name.as_str(), json!(v))).collect());
        match run(&RunConfig { command: template, args }) {
            Ok(r) => SweepPoint {
                point,
                status: serde_json::to_value(r.status).unwrap(),
                exit_code: r.status.exit_code(),
                error: None,
                result: r.result,
            },
            Err(e) => SweepPoint { point, status: json!("error"), exit_code: e.exit_code(), error: Some(e.to_string()), result: Value::Null },
        }
    });
    // one trend row per numeric scalar shared by every successful point
    let ok: Vec<Vec<(String, String)>> = results.iter().filter(|p| p.error.is_none()).map(|p| flatten(&p.result)).collect();
    let mut summary = Vec::new();
    if ok.len() >= 2 {
        for (key, _) in &ok[0] {
            let vals: Option<Vec<f64>> = ok
                .iter()
                .map(|row| row.iter().find(|(k, _)| k == key).and_then(|(_, v)| v.parse::<f64>().ok()))
                .collect();
            if let Some(vals) = vals {
                summary.push(json!({"metric": key, "values": vals, "trend": trend(&vals)}));
            }
        }
    }
    let failures = results.iter().filter(|p| p.exit_code != 0).count();
    let result = json!({
        "template": template,
        "vary": vary,
        "points": results,
        "failures": failures,
        "summary": summary,
    });
    let config = RunConfig { command: template, args: base.clone() };
    Ok(Report::new(config, Status::Ok, Vec::new(), result))
}

/// Rows for CSV output: the varied parameters, status, then every scalar
/// field of the first successful point's result.
pub fn sweep_csv(report: &Report) -> String {
    let points = report.result["points"].as_array().cloned().unwrap_or_default();
    let vary: Vec<String> = report.result["vary"]
        .as_array()
        .map(|v| v.iter().map(|s| s["name"].as_str().unwrap_or_default().to_string()).collect())
        .unwrap_or_default();
    let keys: Vec<String> = points
        .iter()
        .find(|p| !p["result"].is_null())
        .map(|p| flatten(&p["result"]).into_iter().map(|(k, _)| k).collect())
        .unwrap_or_default();
    let mut header: Vec<String> = vary.clone();
    header.extend(["status".to_string(), "exit_code".to_string(), "error".to_string()]);
    header.extend(keys.iter().cloned());
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let mut row: Vec<String> = vary.iter().map(|n| p["point"][n].to_string()).collect();
            row.push(p["status"].as_str().unwrap_or_default().to_string());
            row.push(p["exit_code"].to_string());
            row.push(p["error"].as_str().unwrap_or_default().to_string());
            let flat = flatten(&p["result"]);
            row.extend(keys.iter().map(|k| flat.iter().find(|(x, _)| x == k).map(|(_, v)| v.clone()).unwrap_or_default()));
            row
        })
        .collect();
    crate::report::write_rows(&header, &rows)
}
