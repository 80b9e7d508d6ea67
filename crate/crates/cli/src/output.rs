//! CSV and JSON rendering with version stamp and unit annotations.

use serde_json::{json, Value};

pub const VERSION_STAMP: &str = concat!("kitaev-trap ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A table of columns, each with a unit.
pub struct Table {
    pub title: String,
    pub columns: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, columns: &[(&str, &str)]) -> Self {
        Table {
            title: title.to_string(),
            columns: columns.iter().map(|(c, u)| (c.to_string(), u.to_string())).collect(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, config: &Value) -> String {
        match format {
            Format::Csv => {
                let mut s = format!("# {VERSION_STAMP}\n# {}\n", self.title);
                let units: Vec<String> = self.columns.iter().map(|(c, u)| format!("{c} [{u}]")).collect();
                s += &format!("# units: {}\n", units.join(", "));
                for n in &self.notes {
                    s += &format!("# {n}\n");
                }
                let head: Vec<&str> = self.columns.iter().map(|(c, _)| c.as_str()).collect();
                s += &head.join(",");
                s.push('\n');
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(Cell::csv).collect();
                    s += &cells.join(",");
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let units: serde_json::Map<String, Value> =
                    self.columns.iter().map(|(c, u)| (c.clone(), json!(u))).collect();
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let v = json!({
                    "version": VERSION_STAMP,
                    "title": self.title,
                    "columns": self.columns.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>(),
                    "units": units,
                    "notes": self.notes,
                    "rows": rows,
                    "config": config,
                });
                serde_json::to_string_pretty(&v).unwrap() + "\n"
            }
        }
    }
}

/// A JSON report with version stamp, units and the effective configuration.
pub fn report(title: &str, units: Value, body: Value, config: &Value) -> String {
    let v = json!({
        "version": VERSION_STAMP,
        "title": title,
        "units": units,
        "results": body,
        "config": config,
    });
    serde_json::to_string_pretty(&v).unwrap() + "\n"
}
