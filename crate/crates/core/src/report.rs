//! Deterministic CSV and JSON export.
//!
//! Every float is printed with 17 significant digits so that emitted files
//! re-parse bit-exactly and identical inputs produce byte-identical reports.

use crate::evolution::Trajectory;
use crate::grid::{Domain, Field};
use crate::Result;
use std::fmt::Write as _;
use std::path::Path;

/// 17-significant-digit rendering of a float (round-trips f64 exactly).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Minimal JSON value with deterministic ordering and float formatting.
#[derive(Debug, Clone)]
pub enum Json {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) {
        if let Json::Obj(entries) = self {
            entries.push((key.to_string(), value));
        } else {
            panic!("push on a non-object Json value");
        }
    }

    pub fn from_floats(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|&v| Json::Num(v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Num(x) => {
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x));
                } else {
                    // JSON has no infinities; encode as strings.
                    let _ = write!(out, "\"{x}\"");
                }
            }
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Str(s) => {
                let _ = write!(out, "\"{}\"", escape(s));
            }
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::Arr(items) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent);
                }
                out.push(']');
            }
            Json::Obj(entries) => {
                out.push_str("{\n");
                let pad = "  ".repeat(indent + 1);
                for (k, (key, value)) in entries.iter().enumerate() {
                    let _ = write!(out, "{pad}\"{}\": ", escape(key));
                    value.write(out, indent + 1);
                    if k + 1 < entries.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                let _ = write!(out, "{}}}", "  ".repeat(indent));
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.chars()
        .flat_map(|c| match c {
            '"' => vec!['\\', '"'],
            '\\' => vec!['\\', '\\'],
            '\n' => vec!['\\', 'n'],
            c => vec![c],
        })
        .collect()
}

/// Write a CSV of named columns of equal length.
pub fn write_series_csv(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    assert_eq!(headers.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    for c in columns {
        assert_eq!(c.len(), rows, "CSV columns must share a length");
    }
    let mut out = String::new();
    out.push_str(&headers.join(","));
    out.push('\n');
    for r in 0..rows {
        for (k, col) in columns.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(col[r]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Trajectory CSV: header `t` then the node positions; one row per state.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, domain: &Domain) -> Result<()> {
    let mut out = String::new();
    out.push('t');
    for &x in domain.nodes() {
        out.push(',');
        out.push_str(&fmt_f64(x));
    }
    out.push('\n');
    for s in &traj.states {
        out.push_str(&fmt_f64(s.t));
        for &v in s.u.values() {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Diagnostics CSV: t, mass, supnorm, entropy.
pub fn write_diagnostics_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,mass,supnorm,entropy\n");
    for d in &traj.diagnostics {
        out.push_str(&fmt_f64(d.t));
        out.push(',');
        out.push_str(&fmt_f64(d.mass));
        out.push(',');
        out.push_str(&fmt_f64(d.sup_norm));
        out.push(',');
        out.push_str(&fmt_f64(d.entropy));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Field CSV: position,value rows.
pub fn write_field_csv(path: &Path, domain: &Domain, field: &Field) -> Result<()> {
    write_series_csv(path, &["position", "value"], &[domain.nodes(), field.values()])
}

/// Parse a two-column CSV written by [`write_field_csv`].
pub fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let x = parts.next().and_then(|s| s.parse::<f64>().ok());
        let v = parts.next().and_then(|s| s.parse::<f64>().ok());
        match (x, v) {
            (Some(x), Some(v)) => {
                xs.push(x);
                vs.push(v);
            }
            _ => {
                return Err(crate::DnleError::Config(format!(
                    "malformed CSV row {k}: {line}"
                )))
            }
        }
    }
    Ok((xs, vs))
}
