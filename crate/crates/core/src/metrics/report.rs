use std::fmt::Write;

use crate::error::{contract, Result};

/// One method's per-sequence `(MF, AP)` scores, in percent.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: String,
    pub scores: Vec<(f64, f64)>,
}

impl MethodRow {
    /// Builds a row from scores in `[0, 1]`.
    pub fn from_fractions(method: impl Into<String>, scores: &[(f64, f64)]) -> Self {
        Self {
            method: method.into(),
            scores: scores.iter().map(|&(mf, ap)| (mf * 100.0, ap * 100.0)).collect(),
        }
    }

    pub fn mean(&self) -> (f64, f64) {
        let n = self.scores.len().max(1) as f64;
        let (mf, ap) = self.scores.iter().fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1));
        (mf / n, ap / n)
    }
}

/// Per-sequence MF/AP table with trailing mean columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub sequences: Vec<String>,
    pub rows: Vec<MethodRow>,
}

impl EvalReport {
    pub fn new(task: impl Into<String>, sequences: Vec<String>, rows: Vec<MethodRow>) -> Result<Self> {
        if sequences.is_empty() {
            return contract("a report needs at least one sequence");
        }
        if let Some(r) = rows.iter().find(|r| r.scores.len() != sequences.len()) {
            return contract(format!(
                "row '{}' has {} scores for {} sequences",
                r.method,
                r.scores.len(),
                sequences.len()
            ));
        }
        Ok(Self {
            task: task.into(),
            sequences,
            rows,
        })
    }

    fn cells(row: &MethodRow) -> Vec<String> {
        let (mf, ap) = row.mean();
        row.scores
            .iter()
            .chain(std::iter::once(&(mf, ap)))
            .flat_map(|&(m, a)| [format!("{:.1}", m), format!("{:.1}", a)])
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method");
        for s in self.sequences.iter().map(String::as_str).chain(std::iter::once("mean")) {
            write!(out, ",{s}_mf,{s}_ap").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.method);
            for c in Self::cells(row) {
                write!(out, ",{}", c).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Method |");
        for s in self.sequences.iter().map(String::as_str).chain(std::iter::once("mean")) {
            write!(out, " {s} MF | {s} AP |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(2 * (self.sequences.len() + 1)));
        out.push('\n');
        for row in &self.rows {
            write!(out, "| {} |", row.method).unwrap();
            for c in Self::cells(row) {
                write!(out, " {} |", c).unwrap();
            }
            out.push('\n');
        }
        out
    }
}
