//! Tabular output as CSV with a `#` config header, or as a single JSON object.

use serde::Serialize;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.14e}"),
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            // JSON has no infinities; keep them readable
            Cell::Num(v) => json!(v.to_string()),
            Cell::Int(v) => json!(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

/// Rows with a fixed column order; each row carries the name of the method
/// that produced it (JSON only).
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<(Vec<Cell>, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>, method: impl Into<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push((cells, method.into()));
    }
}

pub struct Report<C: Serialize> {
    pub config: C,
    pub table: Table,
    pub suite_results: Option<Value>,
}

impl<C: Serialize> Report<C> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let config = serde_json::to_string(&self.config).expect("config serializes");
        let _ = writeln!(out, "# spectra {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# config: {config}");
        if let Some(s) = &self.suite_results {
            let _ = writeln!(out, "# suite_results: {s}");
        }
        let _ = writeln!(out, "{}", self.table.columns.join(","));
        for (cells, _) in &self.table.rows {
            let line: Vec<String> = cells.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|(cells, method)| {
                let mut m = Map::new();
                for (name, cell) in self.table.columns.iter().zip(cells) {
                    m.insert((*name).to_string(), cell.json());
                }
                m.insert("method".into(), json!(method));
                Value::Object(m)
            })
            .collect();
        let doc = json!({
            "config": self.config,
            "rows": rows,
            "suite_results": self.suite_results.clone().unwrap_or(Value::Null),
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }
}
