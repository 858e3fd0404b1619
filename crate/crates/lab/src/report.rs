//! Experiment reports. Checks are computed from the records alone, and the
//! canonical JSON form leaves out wall-clock time so identical configs give
//! byte-identical output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::LabResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `value <= bound`, false for NaN.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check::new(name, value <= bound, format!("{value:e} <= {bound:e}"))
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check::new(name, value >= bound, format!("{value:e} >= {bound:e}"))
    }

    pub fn count_zero(name: &str, failures: usize, of: usize) -> Self {
        Check::new(name, failures == 0, format!("{failures} failures out of {of}"))
    }
}

/// What an experiment produces before timing and config echo are attached.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub records: Vec<Value>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn summarize(&mut self, key: &str, value: impl Serialize) {
        self.summary
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn record(&mut self, value: impl Serialize) {
        self.records.push(serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub config: Value,
    pub records: Vec<Value>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl Report {
    /// Pretty JSON without the timing field.
    pub fn canonical_json(&self) -> LabResult<String> {
        let mut v = serde_json::to_value(self)?;
        strip_timing(&mut v);
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ({}, seed {}) ==", self.name, self.kind, self.seed);
        let _ = writeln!(out, "records: {}", self.records.len());
        for (k, v) in &self.summary {
            let _ = writeln!(out, "  {k:<32} {}", compact(v));
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  [{}] {:<width$}  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        let _ = writeln!(
            out,
            "result: {} in {:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.wall_clock_seconds
        );
        out
    }
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 96 {
        format!("{}...", &s[..93])
    } else {
        s
    }
}

/// Removes every `wall_clock_seconds` key, recursively.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_clock_seconds");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Largest value, NaN-propagating so a NaN never hides behind a max.
pub fn nan_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, |acc, x| {
        if acc.is_nan() || x.is_nan() {
            f64::NAN
        } else {
            acc.max(x)
        }
    })
}

pub fn nan_min(values: impl IntoIterator<Item = f64>) -> f64 {
    -nan_max(values.into_iter().map(|x| -x))
}
