//! Machine-readable run reports.
//!
//! A report is one JSON document. Floating-point numbers are written with 17
//! significant digits (`d.dddddddddddddddde±x`), so identical runs produce
//! byte-identical payloads; timings live under `"timings_ms"` and are the
//! only field allowed to differ between runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    /// Passes when `residual ≤ threshold`.
    pub fn at_most(name: &str, residual: f64, threshold: f64) -> Self {
        Check { name: name.into(), residual, threshold, pass: residual <= threshold, error: None }
    }

    /// A check that could not be evaluated because an operation failed.
    pub fn failed(name: &str, threshold: f64, err: &frobmod::Error) -> Self {
        Check {
            name: name.into(),
            residual: f64::INFINITY,
            threshold,
            pass: false,
            error: Some(format!("{}: {err}", err.name())),
        }
    }

    pub fn error_name(&self) -> Option<&str> {
        self.error.as_deref().and_then(|e| e.split(':').next())
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct InstanceReport {
    pub id: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub constants: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InstanceReport {
    pub fn new(id: impl Into<String>) -> Self {
        InstanceReport { id: id.into(), pass: true, ..Default::default() }
    }

    pub fn push(&mut self, check: Check) {
        debug_assert!(self.checks.iter().all(|c| c.name != check.name), "duplicate check {}", check.name);
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn constant(&mut self, key: &str, value: impl Serialize) {
        self.constants.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub tol: f64,
    pub pass: bool,
    pub instances: Vec<InstanceReport>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl Report {
    pub fn new(command: &str, seed: u64, tol: f64) -> Self {
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: "frobmod".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            tol,
            pass: true,
            instances: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, inst: InstanceReport) {
        self.pass &= inst.pass;
        self.instances.push(inst);
    }

    pub fn failures(&self) -> Vec<(&str, &Check)> {
        self.instances
            .iter()
            .flat_map(|i| i.checks.iter().filter(|c| !c.pass).map(move |c| (i.id.as_str(), c)))
            .collect()
    }

    /// The full document.
    pub fn to_json(&self) -> String {
        to_json_17(&serde_json::to_value(self).expect("reports serialise"))
    }

    /// The document without timings; identical runs give identical payloads.
    pub fn payload(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialise");
        if let Value::Object(map) = &mut v {
            map.remove("timings_ms");
        }
        to_json_17(&v)
    }
}

/// `x` with 17 significant digits; non-finite values become strings.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"NaN\"".into()
    } else if x > 0.0 {
        "\"Infinity\"".into()
    } else {
        "\"-Infinity\"".into()
    }
}

/// Pretty JSON with every float written by [`format_f64`].
pub fn to_json_17(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_f64(n.as_f64().expect("float")));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let scalar = items.iter().all(|i| !i.is_array() && !i.is_object());
            if scalar {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    write_value(out, item, indent + 1);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(2.0), "2.0000000000000000e0");
        assert_eq!(format_f64(f64::INFINITY), "\"Infinity\"");
        let v: Value = serde_json::json!({"a": [1, 0.5], "b": {"c": null}});
        let text = to_json_17(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][1].as_f64(), Some(0.5));
    }

    #[test]
    fn payload_drops_timings() {
        let mut r = Report::new("suite", 0, 1e-9);
        r.timings_ms.insert("total".into(), 12);
        assert!(r.to_json().contains("timings_ms"));
        assert!(!r.payload().contains("timings_ms"));
    }
}
