use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};
use zfx_core::guard::GuardLimits;

use crate::config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// A measured quantity violated the bound it was compared with.
    VerificationFailure,
    SearchFailure,
    /// The greedy procedure ran out of elements below its guaranteed size.
    FailedBelowGuarantee,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::FailedBelowGuarantee => 0,
            Status::SearchFailure => 3,
            Status::VerificationFailure => 4,
        }
    }
}

/// A bound a measurement was compared against, and where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRef {
    pub name: &'static str,
    pub value: Value,
    pub provenance: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub guard_limits: GuardLimits,
    pub status: Status,
    pub bounds: Vec<BoundRef>,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(config: RunConfig, status: Status, bounds: Vec<BoundRef>, result: Value) -> Self {
        Report {
            tool: "zfx",
            version: env!("CARGO_PKG_VERSION"),
            config,
            guard_limits: GuardLimits::current(),
            status,
            bounds,
            result,
            wall_time_s: None,
        }
    }
}

/// Pretty JSON with every float written as `{:.16e}` (17 significant digits).
struct FloatFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FloatFormatter<'_> {
    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatFormatter(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("reports serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8")
}

/// Scalar leaves of `v` keyed by dotted path; arrays are skipped.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(_) => {}
            Value::Null => out.push((prefix.to_string(), String::new())),
            Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
            Value::Number(n) => {
                let s = match (n.as_u64(), n.as_i64(), n.as_f64()) {
                    (Some(u), _, _) => u.to_string(),
                    (_, Some(i), _) => i.to_string(),
                    (_, _, Some(f)) => format_float(f),
                    _ => n.to_string(),
                };
                out.push((prefix.to_string(), s));
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

/// One header row and one value row from the report's scalars.
pub fn to_csv(report: &Report) -> String {
    let mut row = vec![
        ("command".to_string(), report.config.command.name().to_string()),
        ("status".to_string(), serde_json::to_value(report.status).unwrap().as_str().unwrap().to_string()),
    ];
    row.extend(flatten(&report.result));
    write_rows(&row.iter().map(|r| r.0.clone()).collect::<Vec<_>>(), &[row.into_iter().map(|r| r.1).collect()])
}

pub fn write_rows(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": 1u32, "c": [0.5]}));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"b\": 1"));
        assert!(s.contains("5.0000000000000000e-1"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn flatten_paths() {
        let v = serde_json::json!({"x": {"y": 2, "z": [1]}, "w": "s", "f": 0.25});
        let f = flatten(&v);
        assert!(f.contains(&("x.y".into(), "2".into())));
        assert!(f.contains(&("w".into(), "s".into())));
        assert!(f.contains(&("f".into(), "2.5000000000000000e-1".into())));
        assert_eq!(f.len(), 3);
    }
}
