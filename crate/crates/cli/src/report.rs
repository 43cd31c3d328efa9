//! Turning results into labelled JSON, and JSON into an indented text table.

use std::fmt::Write;

use dynprice::simulator::{RunTrace, VerificationReport};
use dynprice::{Allocation, Bundle, Market, PriceVector};
use serde_json::{json, Map, Value};

use crate::config::Format;

pub fn bundle(m: &Market, s: &Bundle) -> Value {
    Value::String(format!("{{{}}}", m.label(s)))
}

pub fn allocation(m: &Market, a: &Allocation) -> Value {
    let mut out = Map::new();
    for (b, s) in m.buyers().iter().zip(&a.bundles) {
        out.insert(b.name.clone(), bundle(m, s));
    }
    Value::Object(out)
}

/// Item label to price, with `"unpurchasable"` for blocked items.
pub fn prices(items: &[String], p: &PriceVector) -> Value {
    let map: Map<String, Value> = items
        .iter()
        .zip(p.iter())
        .map(|(l, x)| (l.clone(), serde_json::to_value(x).expect("price serializes")))
        .collect();
    Value::Object(map)
}

pub fn trace(m: &Market, t: &RunTrace) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "buyer": m.buyers()[s.buyer].name,
                "prices": prices(m.items(), &s.prices),
                "demanded": s.demanded.iter().map(|d| bundle(m, d)).collect::<Vec<_>>(),
                "chosen": bundle(m, &s.chosen),
            })
        })
        .collect();
    json!({
        "final_welfare": t.final_welfare,
        "final_allocation": allocation(m, &t.final_allocation),
        "steps": steps,
    })
}

pub fn verification(m: &Market, r: &VerificationReport) -> Value {
    json!({
        "verdict": r.verdict,
        "opt": r.opt,
        "branches_explored": r.branches_explored,
        "leaves": r.leaves,
        "min_welfare": r.min_welfare,
        "max_welfare": r.max_welfare,
        "failure_count": r.failure_count,
        "failures": r.failures.iter().map(|t| trace(m, t)).collect::<Vec<_>>(),
    })
}

pub fn emit(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("json value serializes"),
        Format::Table => {
            let mut out = String::new();
            table(v, 0, &mut out);
            out.trim_end().to_string()
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Array(a) if a.iter().all(|x| scalar(x).is_some() && !x.is_array()) => {
            Some(a.iter().filter_map(scalar).collect::<Vec<_>>().join(" "))
        }
        _ => None,
    }
}

fn table(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        table(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}[{}] {s}", i + 1);
                    }
                    None => {
                        let _ = writeln!(out, "{pad}[{}]", i + 1);
                        table(x, depth + 1, out);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}
