//! Deterministic text output: floats always carry 17 significant digits.

use serde_json::Value;
use std::fmt::Write;

/// `x` with 17 significant digits in scientific notation; non-finite
/// values print as `nan`, `inf`, `-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty-printed JSON with fixed float formatting.
pub fn json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().expect("f64 number");
                out.push_str(&format!("{x:.16e}"));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // numeric rows stay on one line
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 1);
                let _ = write!(out, "{}: ", Value::String(k.clone()));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_17_digits_and_parse_back() {
        let v = json!({"a": 0.1, "b": [1, 2.5], "c": {"d": null, "e": "x"}, "f": []});
        let s = json_string(&v);
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("[1, 2.5000000000000000e0]"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["c"]["e"], "x");
        assert_eq!(fmt17(f64::NAN), "nan");
    }
}
