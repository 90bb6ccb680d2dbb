//! Byte-stable JSON output and its plain-text projection.
//!
//! Floats are written with 17 significant digits in exponent form, so every
//! `f64` round-trips exactly; non-finite values become `null`. Key order is
//! the declaration order of the serialized structs.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact canonical JSON.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Indented `key: value` rendering of a JSON document.
pub fn to_text(value: &Value) -> String {
    let mut out = String::new();
    render(value, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(f)) => format_float(f),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => Some(format!(
            "[{}]",
            a.iter()
                .map(|x| scalar(x).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(", ")
        )),
        _ => None,
    }
}

fn format_float(f: f64) -> String {
    if f == 0.0 || (1e-4..1e6).contains(&f.abs()) {
        let s = format!("{f:.10}");
        let s = s.trim_end_matches('0');
        s.strip_suffix('.').map(|x| format!("{x}.0")).unwrap_or_else(|| s.to_string())
    } else {
        format!("{f:.6e}")
    }
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(to_canonical_json(&0.1), "1.0000000000000001e-1");
        assert_eq!(to_canonical_json(&1.0), "1.0000000000000000e0");
        assert_eq!(to_canonical_json(&f64::NAN), "null");
        assert_eq!(to_canonical_json(&vec![3u8]), "[3]");
        let back: f64 = serde_json::from_str(&to_canonical_json(&0.1)).unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn text_projection() {
        let v: Value = serde_json::from_str(r#"{"a":1,"b":{"c":[1,2]},"d":[{"e":0.5}]}"#).unwrap();
        assert_eq!(to_text(&v), "a: 1\nb:\n  c: [1, 2]\nd:\n  -\n    e: 0.5\n");
    }
}
