//! Reports and their JSON and text renderings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Everything that depends only on the scenario, seed and tolerances.
    pub deterministic: Deterministic,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct Deterministic {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub tolerance: ToleranceReport,
    pub passed: bool,
    pub tasks: Vec<TaskReport>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToleranceReport {
    pub alg: f64,
    pub int: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub index: usize,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// `None` for tasks that only compute.
    pub verdict: Option<bool>,
    pub expected: Option<bool>,
    pub passed: bool,
    pub result: Value,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.deterministic.passed {
            0
        } else {
            crate::error::EXIT_TASK_FAILURE
        }
    }

    /// The deterministic region alone, as compact JSON.
    pub fn deterministic_json(&self) -> String {
        serde_json::to_string(&self.deterministic).expect("report values serialize")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report values serialize");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let d = &self.deterministic;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} | scenario {} | seed {} | tol {:e}/{:e}",
            d.tool, d.version, d.scenario, d.seed, d.tolerance.alg, d.tolerance.int
        );
        for t in &d.tasks {
            let status = match (t.verdict, t.passed) {
                (None, _) => "done",
                (Some(_), true) => "PASS",
                (Some(_), false) => "FAIL",
            };
            let label = t
                .label
                .as_deref()
                .map(|l| format!(" \"{l}\""))
                .unwrap_or_default();
            let _ = writeln!(out, "[{}] {}{} {}", t.index, t.kind, label, status);
            if let Some(v) = t.verdict {
                let _ = writeln!(
                    out,
                    "  verdict: {v} (expected {})",
                    t.expected.unwrap_or(true)
                );
            }
            write_fields(&mut out, &t.result, 1);
        }
        let _ = writeln!(out, "overall: {}", if d.passed { "PASS" } else { "FAIL" });
        let _ = writeln!(out, "elapsed: {:.1} ms", self.timing.elapsed_ms);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(x) if n.is_f64() => format_number(x),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn format_number(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

/// A `[re, im]` pair.
fn complex(v: &Value) -> Option<String> {
    let a = v.as_array()?;
    match a.as_slice() {
        [Value::Number(re), Value::Number(im)] => {
            let (re, im) = (re.as_f64()?, im.as_f64()?);
            Some(format!(
                "{re:.6}{}{:.6}i",
                if im < 0.0 { '-' } else { '+' },
                im.abs()
            ))
        }
        _ => None,
    }
}

/// State vectors are lists of pairs, indistinguishable from an N×2 real
/// matrix without the field name.
fn complex_vector(key: &str, v: &Value) -> Option<String> {
    if !matches!(key, "state" | "psi") {
        return None;
    }
    let cells: Option<Vec<String>> = v.as_array()?.iter().map(complex).collect();
    Some(cells?.join("  "))
}

fn row_text(row: &Value) -> Option<String> {
    let cells: Option<Vec<String>> = row
        .as_array()?
        .iter()
        .map(|c| complex(c).or_else(|| c.as_f64().map(|x| format!("{x:.6}"))))
        .collect();
    Some(cells?.join("  "))
}

fn matrix_rows(v: &Value) -> Option<Vec<String>> {
    let rows = v.as_array()?;
    if rows.is_empty()
        || !rows
            .iter()
            .all(|r| r.as_array().is_some_and(|c| !c.is_empty()))
    {
        return None;
    }
    rows.iter().map(row_text).collect()
}

fn write_fields(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, field) in map {
                write_value(out, &pad, k, field, depth);
            }
        }
        other => write_value(out, &pad, "value", other, depth),
    }
}

fn write_value(out: &mut String, pad: &str, key: &str, v: &Value, depth: usize) {
    if let Some(s) = scalar(v) {
        let _ = writeln!(out, "{pad}{key}: {s}");
    } else if let Some(r) = complex_vector(key, v) {
        let _ = writeln!(out, "{pad}{key}: [{r}]");
    } else if let Some(rows) = matrix_rows(v) {
        let _ = writeln!(out, "{pad}{key}:");
        for r in rows {
            let _ = writeln!(out, "{pad}  [{r}]");
        }
    } else if let Some(r) = row_text(v) {
        let _ = writeln!(out, "{pad}{key}: [{r}]");
    } else if let Value::Object(_) = v {
        let _ = writeln!(out, "{pad}{key}:");
        write_fields(out, v, depth + 1);
    } else if let Value::Array(items) = v {
        let _ = writeln!(out, "{pad}{key}:");
        for (i, item) in items.iter().enumerate() {
            write_value(out, &format!("{pad}  "), &format!("[{i}]"), item, depth + 1);
        }
    }
}
