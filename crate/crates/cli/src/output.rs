//! Rendering of command results as JSON, CSV or text.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use stochastik::{Backend, Matrix, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Rows for CSV output of series and matrices.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct Output {
    pub command: String,
    pub backend: Option<Backend>,
    pub seed: Option<u64>,
    pub result: Value,
    pub table: Option<Table>,
    /// Emitted verbatim in every format, for model files.
    pub raw: Option<String>,
}

impl Output {
    pub fn new(command: &str, result: Value) -> Self {
        Self { command: command.into(), backend: None, seed: None, result, table: None, raw: None }
    }

    pub fn raw(command: &str, text: String) -> Self {
        Self { raw: Some(text), ..Self::new(command, Value::Null) }
    }

    pub fn backend(mut self, b: Backend) -> Self {
        self.backend = Some(b);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("schema_version".to_string(), SCHEMA_VERSION.to_string()),
            ("command".to_string(), self.command.clone()),
        ];
        if let Some(b) = self.backend {
            h.push(("backend".into(), backend_name(b).into()));
        }
        if let Some(s) = self.seed {
            h.push(("seed".into(), s.to_string()));
            h.push(("rng".into(), stochastik::RngStream::ALGORITHM.into()));
        }
        h
    }

    pub fn render(&self, format: Format) -> String {
        if let Some(text) = &self.raw {
            return format!("{text}\n");
        }
        match format {
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
                obj.insert("command".into(), json!(self.command));
                if let Some(b) = self.backend {
                    obj.insert("backend".into(), json!(backend_name(b)));
                }
                if let Some(s) = self.seed {
                    obj.insert("seed".into(), json!(s));
                    obj.insert("rng".into(), json!(stochastik::RngStream::ALGORITHM));
                }
                obj.insert("result".into(), self.result.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                for (k, v) in self.header() {
                    let _ = writeln!(s, "# {k}={v}");
                }
                match &self.table {
                    Some(t) => {
                        s.push_str(&csv_line(&t.columns));
                        for r in &t.rows {
                            s.push_str(&csv_line(r));
                        }
                    }
                    None => {
                        s.push_str("key,value\n");
                        for (k, v) in flatten(&self.result) {
                            s.push_str(&csv_line(&[k, v]));
                        }
                    }
                }
                s
            }
            Format::Text => {
                let mut s = String::new();
                for (k, v) in self.header() {
                    let _ = writeln!(s, "{k}: {v}");
                }
                for (k, v) in flatten(&self.result) {
                    let _ = writeln!(s, "{k}: {v}");
                }
                s
            }
        }
    }
}

pub fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::Exact => "exact",
        Backend::Float => "float",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Dotted-path view of a JSON value. Exact numbers print as `a/b (decimal)`.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(v, String::new(), &mut out);
    out
}

fn walk(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) if m.len() == 2 && m.contains_key("exact") && m.contains_key("decimal") => {
            out.push((path, format!("{} ({})", scalar_text(&m["exact"]), scalar_text(&m["decimal"]))));
        }
        Value::Object(m) => {
            for (k, x) in m {
                walk(x, join(&path, k), out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                walk(x, join(&path, &i.to_string()), out);
            }
        }
        other => out.push((path, scalar_text(other))),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Exact values carry the fraction and its decimal value.
pub fn num<T: Scalar>(x: &T) -> Value {
    if T::is_exact() {
        json!({ "exact": x.to_string(), "decimal": x.to_f64() })
    } else {
        json!(x.to_f64())
    }
}

pub fn nums<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(num).collect())
}

pub fn matrix<T: Scalar>(m: &Matrix<T>) -> Value {
    Value::Array((0..m.rows()).map(|i| nums(m.row(i))).collect())
}

/// Cell text for CSV: the fraction in the exact backend, the float otherwise.
pub fn cell<T: Scalar>(x: &T) -> String {
    if T::is_exact() {
        x.to_string()
    } else {
        Value::from(x.to_f64()).to_string()
    }
}

pub fn float_cell(x: f64) -> String {
    Value::from(x).to_string()
}

/// `label,col_0,...` rows of a matrix.
pub fn matrix_table<T: Scalar>(labels: &[String], m: &Matrix<T>, col_labels: &[String]) -> Table {
    let mut cols = vec!["state".to_string()];
    cols.extend(col_labels.iter().cloned());
    let mut t = Table { columns: cols, rows: Vec::new() };
    for (i, label) in labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(m.row(i).iter().map(cell));
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use stochastik::Rational;

    #[test]
    fn exact_numbers_carry_both_forms() {
        let v = num(&Rational::from_ratio(1, 4));
        assert_eq!(v, json!({"exact": "1/4", "decimal": 0.25}));
        assert_eq!(flatten(&json!({"a": [v]})), vec![("a.0".to_string(), "1/4 (0.25)".to_string())]);
        assert_eq!(num(&0.5f64), json!(0.5));
    }

    #[test]
    fn csv_quotes_fields() {
        assert_eq!(csv_line(&["a,b".into(), "c".into()]), "\"a,b\",c\n");
    }

    #[test]
    fn every_format_records_the_seed() {
        let out = Output::new("demo", json!({"x": 1})).seed(42);
        for f in [Format::Json, Format::Csv, Format::Text] {
            assert!(out.render(f).contains("42"), "{f:?}");
        }
    }
}
