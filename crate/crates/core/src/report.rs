//! Canonical report documents: sorted keys, rationals as `"num/den"`,
//! reals with 15 significant digits.

use std::fmt::Write;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const TOOL_NAME: &str = "spencer-lab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SIGNIFICANT_DIGITS: usize = 15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(format!("unknown format `{s}`; expected json or text")),
        }
    }
}

/// How a numeric quantity was obtained and how far it may be off.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub quantity: String,
    pub method: String,
    pub error_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments as given on the command line.
    pub argv: Vec<String>,
    pub input_hash: String,
    pub seed: Option<u64>,
    pub result: Value,
    pub provenance: Vec<Provenance>,
}

impl ReportDocument {
    pub fn new(
        command: impl Into<String>,
        argv: Vec<String>,
        input_hash: String,
        result: Value,
    ) -> Self {
        ReportDocument {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            argv,
            input_hash,
            seed: None,
            result,
            provenance: Vec::new(),
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report is serializable")
    }
}

/// SHA-256 over the command echo and the input text.
pub fn input_hash(command: &[String], source: Option<&str>) -> String {
    let mut h = Sha256::new();
    for c in command {
        h.update((c.len() as u64).to_le_bytes());
        h.update(c.as_bytes());
    }
    match source {
        Some(s) => {
            h.update([1u8]);
            h.update(s.as_bytes());
        }
        None => h.update([0u8]),
    }
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
}

/// `x` rounded to 15 significant digits, in a JSON-compatible spelling.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x);
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn number(n: &serde_json::Number) -> String {
    if n.is_i64() || n.is_u64() {
        n.to_string()
    } else {
        format_real(n.as_f64().unwrap_or(f64::NAN))
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn sorted(map: &Map<String, Value>) -> Vec<(&String, &Value)> {
    let mut v: Vec<_> = map.iter().collect();
    v.sort_by(|a, b| a.0.cmp(b.0));
    v
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    let close = "  ".repeat(indent);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&quote(s)),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad);
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&close);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            let entries = sorted(m);
            for (i, (k, x)) in entries.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", quote(k));
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < entries.len() { ",\n" } else { "\n" });
            }
            out.push_str(&close);
            out.push('}');
        }
    }
}

/// Canonical JSON text of an arbitrary value.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, v, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => number(n),
        other => other.to_string(),
    }
}

fn write_text(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in sorted(m) {
                if is_scalar(x) {
                    let _ = writeln!(out, "{pad}{k}: {}", scalar_text(x));
                } else if matches!(x, Value::Array(a) if a.iter().all(is_scalar)) {
                    let items: Vec<String> = x
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(scalar_text)
                        .collect();
                    let _ = writeln!(out, "{pad}{k}: [{}]", items.join(", "));
                } else {
                    let _ = writeln!(out, "{pad}{k}:");
                    write_text(out, x, indent + 1);
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_scalar(x) {
                    let _ = writeln!(out, "{pad}- {}", scalar_text(x));
                } else {
                    let _ = writeln!(out, "{pad}-");
                    write_text(out, x, indent + 1);
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar_text(other));
        }
    }
}

/// Deterministic indented rendering of the same payload.
pub fn text_report(v: &Value) -> String {
    let mut out = String::new();
    write_text(&mut out, v, 0);
    out
}

pub fn emit_report(doc: &ReportDocument, format: Format) -> Vec<u8> {
    let v = doc.to_value();
    match format {
        Format::Json => canonical_json(&v).into_bytes(),
        Format::Text => text_report(&v).into_bytes(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rational_string};
    use serde_json::json;

    #[test]
    fn keys_sorted_and_reals_rounded() {
        let v = json!({"b": 1, "a": std::f64::consts::PI, "c": {"z": [0.1, 2.5e-9], "y": null}});
        let s = canonical_json(&v);
        assert_eq!(s, "{\n  \"a\": 3.14159265358979,\n  \"b\": 1,\n  \"c\": {\n    \"y\": null,\n    \"z\": [\n      0.1,\n      2.5e-9\n    ]\n  }\n}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["c"]["z"][1].as_f64(), Some(2.5e-9));
    }

    #[test]
    fn rationals_are_strings() {
        let v = json!({"q": rational_string(&rat(1, 3))});
        assert!(canonical_json(&v).contains("\"1/3\""));
    }

    #[test]
    fn identical_inputs_identical_bytes() {
        let mk = || {
            let mut r = ReportDocument::new(
                "det",
                vec!["det".into()],
                input_hash(&["det".into()], None),
                json!({"det": 39.47841760435743}),
            );
            r.provenance.push(Provenance {
                quantity: "det".into(),
                method: "closed_form".into(),
                error_bound: Some(1e-12),
            });
            r
        };
        let (a, b) = (
            emit_report(&mk(), Format::Json),
            emit_report(&mk(), Format::Json),
        );
        assert_eq!(a, b);
        let s = String::from_utf8(a).unwrap();
        assert!(s.contains("\"error_bound\": 1e-12"));
        assert_eq!(
            emit_report(&mk(), Format::Text),
            emit_report(&mk(), Format::Text)
        );
    }

    #[test]
    fn hash_separates_inputs() {
        let a = input_hash(&["ab".into(), "c".into()], None);
        let b = input_hash(&["a".into(), "bc".into()], None);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(input_hash(&[], Some("")), input_hash(&[], None));
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(39.47841760435743), "39.4784176043574");
        assert_eq!(format_real(-0.5), "-0.5");
        assert_eq!(format_real(1e20), "1e20");
        assert_eq!(format_real(f64::NAN), "null");
    }
}
