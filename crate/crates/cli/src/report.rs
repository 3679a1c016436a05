//! Command results and their json, csv and plain renderings.

use clap::ValueEnum;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "qwein/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Ordered scalar fields plus an optional table of rows.
#[derive(Debug, Clone)]
pub struct Report {
    fields: Map<String, Value>,
    table: Option<(String, Table)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("schema".into(), Value::from(SCHEMA));
        fields.insert("command".into(), Value::from(command));
        Report {
            fields,
            table: None,
        }
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.insert(key.into(), value.into());
        self
    }

    pub fn table(mut self, name: &str, columns: &[&str], rows: Vec<Vec<Value>>) -> Self {
        self.table = Some((
            name.into(),
            Table {
                columns: columns.iter().map(|c| c.to_string()).collect(),
                rows,
            },
        ));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Plain => self.plain(),
        }
    }

    fn json(&self) -> String {
        let mut out = self.fields.clone();
        if let Some((name, table)) = &self.table {
            let rows = table
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        table
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.iter().cloned())
                            .collect(),
                    )
                })
                .collect();
            out.insert(name.clone(), Value::Array(rows));
        }
        format!("{}\n", Value::Object(out))
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some((_, table)) => {
                w.write_record(&table.columns).expect("in-memory write");
                for row in &table.rows {
                    w.write_record(row.iter().map(scalar))
                        .expect("in-memory write");
                }
            }
            None => {
                w.write_record(["key", "value"]).expect("in-memory write");
                for (k, v) in &self.fields {
                    w.write_record([k.clone(), scalar(v)])
                        .expect("in-memory write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    fn plain(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            if k == "schema" {
                continue;
            }
            out.push_str(&format!("{k}: {}\n", scalar(v)));
        }
        if let Some((name, table)) = &self.table {
            out.push_str(&format!("{name}:\n"));
            let cells: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| r.iter().map(scalar).collect())
                .collect();
            let widths: Vec<usize> = (0..table.columns.len())
                .map(|c| {
                    cells
                        .iter()
                        .map(|r| r[c].chars().count())
                        .chain([table.columns[c].chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |row: &[String]| {
                let padded: Vec<String> = row
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:<w$}"))
                    .collect();
                format!("  {}\n", padded.join("  ").trim_end())
            };
            out.push_str(&line(&table.columns));
            for row in &cells {
                out.push_str(&line(row));
            }
        }
        out
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
