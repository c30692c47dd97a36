//! The machine-readable report every command emits.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sparse_diffres::verify::Series;
use sparse_diffres::{DiffPoly, Monomial, Rational};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub inputs_digest: String,
    pub timing_ms: u128,
    pub status: Status,
    pub output: Value,
    pub warnings: Vec<String>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        let _ = writeln!(out, "status: {}", if self.status == Status::Ok { "ok" } else { "refused" });
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "inputs_digest: {}", self.inputs_digest);
        let _ = writeln!(out, "timing_ms: {}", self.timing_ms);
        render(&mut out, &self.output, 0);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Indented `key: value` rendering of a JSON value.
fn render(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                if is_scalar(x) || is_flat_array(x) {
                    let _ = writeln!(out, "{pad}{k}: {}", scalar(x));
                } else {
                    let _ = writeln!(out, "{pad}{k}:");
                    render(out, x, indent + 1);
                }
            }
        }
        Value::Array(xs) => {
            for x in xs {
                if is_scalar(x) || is_flat_array(x) {
                    let _ = writeln!(out, "{pad}- {}", scalar(x));
                } else {
                    let _ = writeln!(out, "{pad}-");
                    render(out, x, indent + 1);
                }
            }
        }
        x => {
            let _ = writeln!(out, "{pad}{}", scalar(x));
        }
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Object(_) | Value::Array(_))
}

fn is_flat_array(v: &Value) -> bool {
    matches!(v, Value::Array(xs) if xs.iter().all(is_scalar))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        Value::Array(xs) => format!("[{}]", xs.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        x => x.to_string(),
    }
}

/// SHA-256 over the labelled inputs, in order.
pub fn digest(parts: &[(&str, &[u8])]) -> String {
    let mut h = Sha256::new();
    for (label, bytes) in parts {
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// `"p/q"`, or `"p"` for integers.
pub fn rational(q: &Rational) -> Value {
    Value::String(q.to_string())
}

/// Terms from the leading one down, matching the printed form.
pub fn poly(p: &DiffPoly) -> Value {
    let terms: Vec<Value> = p.terms().rev().map(|(m, c)| json!({ "coeff": rational(c), "monomial": m.to_string() })).collect();
    json!({ "text": p.to_string(), "terms": terms })
}

pub fn monomial(m: &Monomial) -> Value {
    Value::String(m.to_string())
}

pub fn series(s: &Series) -> Value {
    Value::Array(s.coeffs().iter().map(rational).collect())
}

/// Orders with `−∞` written as `"-inf"`.
pub fn ext_orders(v: &[Option<i64>]) -> Value {
    Value::Array(v.iter().map(|x| x.map_or_else(|| Value::from("-inf"), Value::from)).collect())
}

pub fn orders(v: &[Option<u32>]) -> Value {
    Value::Array(v.iter().map(|x| x.map_or(Value::Null, Value::from)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_diffres::diffpoly::parse_poly;

    #[test]
    fn polys_serialize_in_printed_order() {
        let p = parse_poly("u0_1*u1_0 - 1/2*u0_0").unwrap();
        let v = poly(&p);
        let text = v["text"].as_str().unwrap().to_string();
        let first = v["terms"][0]["monomial"].as_str().unwrap();
        assert!(text.starts_with(first) || text.starts_with(&format!("-1/2*{first}")) || text.starts_with(&format!("-{first}")), "{text}");
        let coeffs: Vec<&str> = v["terms"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap()).collect();
        assert!(coeffs.contains(&"-1/2") && coeffs.contains(&"1"));
    }

    #[test]
    fn digest_separates_fields() {
        assert_ne!(digest(&[("a", b"bc")]), digest(&[("ab", b"c")]));
        assert_eq!(digest(&[("x", b"1")]).len(), 64);
    }

    #[test]
    fn text_rendering() {
        let d = ResultDocument {
            command: "jacobi".into(),
            version: VERSION.into(),
            seed: 1,
            inputs_digest: "00".into(),
            timing_ms: 0,
            status: Status::Ok,
            output: json!({ "J": ext_orders(&[Some(12), Some(12), Some(7), None]), "w": null }),
            warnings: vec![],
        };
        let t = d.to_text();
        assert!(t.contains("J: [12, 12, 7, -inf]"), "{t}");
        assert!(t.contains("w: none"), "{t}");
    }
}
