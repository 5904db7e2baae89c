use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

/// A command result: a JSON document plus a flat table view of it.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Set when the command's verdict is negative (exit status 1).
    pub negative: bool,
}

impl Report {
    pub fn new(json: Value, header: &[&str]) -> Self {
        Report {
            json,
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            negative: false,
        }
    }

    /// Two-column key/value view.
    pub fn fields(json: Value, fields: &[(&str, String)]) -> Self {
        let mut r = Report::new(json, &["field", "value"]);
        for (k, v) in fields {
            r.row(vec![k.to_string(), v.clone()]);
        }
        r
    }

    pub fn row(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn negative(mut self, negative: bool) -> Self {
        self.negative = negative;
        self
    }

    pub fn render(&self, format: Format, deterministic: bool) -> String {
        match format {
            Format::Json => {
                let mut json = self.json.clone();
                if deterministic {
                    strip_timing(&mut json);
                }
                let mut s = serde_json::to_string_pretty(&json).expect("json renders");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = String::new();
                for line in std::iter::once(&self.header).chain(&self.rows) {
                    let cells: Vec<String> = line.iter().map(|c| csv_cell(c)).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Table => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
                for row in &self.rows {
                    for (w, c) in widths.iter_mut().zip(row) {
                        *w = (*w).max(c.len());
                    }
                }
                let mut s = String::new();
                for line in std::iter::once(&self.header).chain(&self.rows) {
                    let cells: Vec<String> = line
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect();
                    s.push_str(cells.join("  ").trim_end());
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Removes wall-clock fields so runs can be compared byte for byte.
pub fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn formats() {
        let mut r = Report::new(json!({"a": 1, "ms": 5}), &["x", "long name"]);
        r.row(vec!["1".into(), "a,b".into()]);
        assert_eq!(r.render(Format::Csv, false), "x,long name\n1,\"a,b\"\n");
        assert_eq!(r.render(Format::Table, false), "x  long name\n1  a,b\n");
        assert!(!r.render(Format::Json, true).contains("ms"));
        assert!(r.render(Format::Json, false).contains("ms"));
    }
}
