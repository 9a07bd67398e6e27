//! Tabular artifacts rendered as CSV (config header line, trailing `#`
//! summary lines) or JSON (`config`, `columns`, `rows`, `summary`).

use qsg_core::config::{OutputFormat, RunConfig};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => match i64::try_from(*i) {
                Ok(v) => json!(v),
                Err(_) => json!(i.to_string()),
            },
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or_else(|| json!(fmt_float(*x)), Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Value)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.summary.push((key.to_string(), value));
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            OutputFormat::Csv => self.csv(cfg),
            OutputFormat::Json => self.json(cfg),
        }
    }

    fn csv(&self, cfg: &RunConfig) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
        let mut out = format!("{}\n{body}", cfg.header_line());
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }

    fn json(&self, cfg: &RunConfig) -> String {
        let summary: serde_json::Map<String, Value> = self.summary.iter().cloned().collect();
        let rows: Vec<Vec<Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let doc = json!({ "config": cfg, "columns": self.columns, "rows": rows, "summary": summary });
        let mut s = serde_json::to_string_pretty(&doc).expect("json document");
        s.push('\n');
        s
    }
}
