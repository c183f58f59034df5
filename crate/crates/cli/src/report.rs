//! Reports and their byte-stable serialization.
//!
//! Object keys are emitted in sorted order and every non-integer number as
//! `{:.16e}` (17 significant digits), so identical inputs give identical bytes
//! regardless of the JSON library's own formatting choices.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Summary of an `f₀` integration.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSummary {
    pub h: f64,
    pub interval: (f64, f64),
    pub steps: usize,
    pub f0_end: f64,
    pub df0_end: f64,
    pub sign_changes: Vec<f64>,
    pub truncated: Option<String>,
    /// `f'' − μ f'² − n a` on the sampled `f = −log(f₀)/μ`.
    pub theorem_residual: Option<f64>,
    pub residual_interval: Option<(f64, f64)>,
}

impl OdeSummary {
    fn to_value(&self) -> Value {
        let pair = |p: (f64, f64)| json!([num(p.0), num(p.1)]);
        json!({
            "h": num(self.h),
            "interval": pair(self.interval),
            "steps": self.steps,
            "f0_end": num(self.f0_end),
            "df0_end": num(self.df0_end),
            "sign_changes": self.sign_changes.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "sign_change_count": self.sign_changes.len(),
            "truncated": self.truncated,
            "theorem_residual": self.theorem_residual.map(num),
            "residual_interval": self.residual_interval.map(pair),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub verdict: Verdict,
    pub branch: Option<String>,
    pub residuals: BTreeMap<String, f64>,
    pub lambda: Option<f64>,
    pub tau_samples: Vec<f64>,
    pub ode: Option<OdeSummary>,
    pub warnings: Vec<String>,
    pub seed: u64,
}

fn num(x: f64) -> Value {
    // non-finite values have no JSON spelling; they surface as null
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

impl Report {
    pub fn new(seed: u64) -> Self {
        Report {
            verdict: Verdict::Pass,
            branch: None,
            residuals: BTreeMap::new(),
            lambda: None,
            tau_samples: Vec::new(),
            ode: None,
            warnings: Vec::new(),
            seed,
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "verdict": self.verdict.label(),
            "branch": self.branch,
            "residuals": self.residuals.iter().map(|(k, &v)| (k.clone(), num(v))).collect::<Map<_, _>>(),
            "lambda": self.lambda.map(num),
            "tau_samples": self.tau_samples.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "ode": self.ode.as_ref().map(OdeSummary::to_value),
            "warnings": self.warnings,
            "tool_version": TOOL_VERSION,
            "seed": self.seed,
        })
    }

    pub fn to_json(&self) -> String {
        canonical_json(&self.to_value())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {}", self.verdict.label());
        if let Some(b) = &self.branch {
            let _ = writeln!(s, "branch: {b}");
        }
        if let Some(l) = self.lambda {
            let _ = writeln!(s, "lambda: {l:.16e}");
        }
        if !self.residuals.is_empty() {
            s.push_str("residuals:\n");
            let width = self.residuals.keys().map(String::len).max().unwrap_or(0);
            for (k, v) in &self.residuals {
                let _ = writeln!(s, "  {k:<width$}  {v:.3e}");
            }
        }
        if !self.tau_samples.is_empty() {
            let (lo, hi) = self.tau_samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
            let _ = writeln!(s, "tau: {} samples in [{lo:.6e}, {hi:.6e}]", self.tau_samples.len());
        }
        if let Some(o) = &self.ode {
            let _ = writeln!(
                s,
                "ode: {} steps of h = {:e} on [{}, {}], f0(end) = {:.16e}, {} sign change(s)",
                o.steps,
                o.h,
                o.interval.0,
                o.interval.1,
                o.f0_end,
                o.sign_changes.len()
            );
            if let Some(r) = o.theorem_residual {
                let _ = writeln!(s, "ode: theorem residual {r:.3e}");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "seed: {}  tool: qe-verify {TOOL_VERSION}", self.seed);
        s
    }
}

/// Pretty JSON with sorted keys, two-space indent, integers verbatim and
/// floats as `{:.16e}`; ends with a newline.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat("  ").take(d));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => {
                let _ = write!(out, "{u}");
            }
            (None, Some(i), _) => {
                let _ = write!(out, "{i}");
            }
            (None, None, Some(x)) => {
                let _ = write!(out, "{x:.16e}");
            }
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push_str(": ");
                write_value(&map[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = canonical_json(&json!({"b": 0.1, "a": 3, "c": [1.0, -2.5e-12]}));
        assert_eq!(
            s,
            "{\n  \"a\": 3,\n  \"b\": 1.0000000000000001e-1,\n  \"c\": [\n    1.0000000000000000e0,\n    -2.4999999999999998e-12\n  ]\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_becomes_null() {
        let mut r = Report::new(1);
        r.residuals.insert("x".into(), f64::NAN);
        assert_eq!(r.to_value()["residuals"]["x"], Value::Null);
    }
}
