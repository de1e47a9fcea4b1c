//! Result tables and their CSV / JSON renderings.
//!
//! CSV layout: `# key: value` metadata lines, one column-header line, then
//! data rows. Floats are written with 17 significant digits.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::OutputFormat;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(format_float(*v)),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column header plus data rows, without metadata.
    pub fn csv_body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.csv_body());
        out
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            let value = serde_json::from_str(v).unwrap_or_else(|_| json!(v));
            meta.insert(k.clone(), value);
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({ "metadata": meta, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn write(&self, format: OutputFormat, path: Option<&str>) -> Result<(), CliError> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Output(format!("{p}: {e}"))),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Output(e.to_string())),
        }
    }
}

/// Extracts the data rows of a CSV rendering, skipping metadata lines.
pub fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = format_float(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("seed", 3);
        t.push(vec![Cell::Float(1.0), Cell::Int(2)]);
        t.push(vec![Cell::Missing, Cell::Text("x".into())]);
        let csv = t.to_csv();
        assert_eq!(csv, "# seed: 3\na,b\n1.0000000000000000e0,2\n,x\n");
        assert_eq!(data_rows(&csv), ["1.0000000000000000e0,2", ",x"]);
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["a"]);
        t.meta("config", r#"{"k":1}"#);
        t.push(vec![Cell::Float(0.5)]);
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["metadata"]["config"]["k"], 1);
        assert_eq!(v["rows"][0][0], 0.5);
    }
}
