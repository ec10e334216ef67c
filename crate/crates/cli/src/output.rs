//! CSV / JSON rendering. CSV floats carry 17 significant digits; metadata
//! goes into `#` lines ahead of the header.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(x.to_string()),
            Cell::Text(s) => json!(s),
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn new(command: &str) -> Self {
        Self {
            metadata: vec![
                ("tool".into(), format!("qfi {}", env!("CARGO_PKG_VERSION"))),
                ("command".into(), command.into()),
            ],
            ..Default::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (k, v) in &self.metadata {
                    out.push_str(&format!("# {k} = {v}\n"));
                }
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let meta: Map<String, Value> = self
                    .metadata
                    .iter()
                    .map(|(k, v)| (k.clone(), json!(v)))
                    .collect();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            self.columns
                                .iter()
                                .cloned()
                                .zip(row.iter().map(Cell::json))
                                .collect(),
                        )
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&json!({ "metadata": meta, "rows": rows }))
                    .expect("document serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Flattens a JSON object into a one-row CSV; arrays are joined with `;`.
pub fn record_to_csv(command: &str, record: &Value) -> String {
    let mut doc = Document::new(command);
    if let Value::Object(map) = record {
        for (k, v) in map {
            doc.columns.push(k.clone());
            let cell = match v {
                Value::Number(n) if n.is_u64() => Cell::Int(n.as_u64().unwrap()),
                Value::Number(n) => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
                Value::Array(items) => Cell::Text(
                    items
                        .iter()
                        .map(|x| match x {
                            Value::Number(n) => format_float(n.as_f64().unwrap_or(f64::NAN)),
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(";"),
                ),
                Value::String(s) => Cell::Text(s.clone()),
                other => Cell::Text(other.to_string()),
            };
            if doc.rows.is_empty() {
                doc.rows.push(Vec::new());
            }
            doc.rows[0].push(cell);
        }
    }
    doc.render(Format::Csv)
}

pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(format!("writing {}", p.display()), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("writing stdout", e))
        }
    }
}
