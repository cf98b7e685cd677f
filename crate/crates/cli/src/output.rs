//! Records and the three output formats.

use std::io::{self, Write};
use std::str::FromStr;

use clap::ValueEnum;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Int(u64),
    Float(f64),
    Str(String),
    Map(Vec<(String, Value)>),
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// 17 significant digits; non-finite values spelled out.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Null => String::new(),
            Value::Int(v) => v.to_string(),
            Value::Float(v) => fmt_float(*v),
            Value::Str(s) => s.clone(),
            Value::Map(entries) => {
                entries.iter().map(|(k, v)| format!("{k}={}", v.text())).collect::<Vec<_>>().join(";")
            }
        }
    }

    fn json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            Value::Null => J::Null,
            Value::Int(v) => J::Number((*v).into()),
            Value::Float(v) if v.is_finite() => {
                // keeps the exact 17-digit text rather than the shortest repr
                J::Number(serde_json::Number::from_str(&fmt_float(*v)).expect("formatted float is a JSON number"))
            }
            Value::Float(v) => J::String(fmt_float(*v)),
            Value::Str(s) => J::String(s.clone()),
            Value::Map(entries) => J::Object(entries.iter().map(|(k, v)| (k.clone(), v.json())).collect()),
        }
    }
}

/// An ordered list of named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn fields(&self) -> &[(String, Value)] {
        &self.0
    }

    pub fn to_json(&self) -> serde_json::Value {
        Value::Map(self.0.clone()).json()
    }

    fn flat(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (k, v) in &self.0 {
            match v {
                Value::Map(entries) => {
                    out.extend(entries.iter().map(|(sub, v)| (format!("{k}.{sub}"), v.text())));
                }
                _ => out.push((k.clone(), v.text())),
            }
        }
        out
    }
}

/// Union of flattened column names in order of first appearance.
fn columns(rows: &[Vec<(String, String)>]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for row in rows {
        for (k, _) in row {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn cells(row: &[(String, String)], cols: &[String]) -> Vec<String> {
    cols.iter()
        .map(|c| row.iter().find(|(k, _)| k == c).map(|(_, v)| v.clone()).unwrap_or_default())
        .collect()
}

pub fn write(format: Format, records: &[Record], out: &mut dyn Write) -> io::Result<()> {
    if format == Format::JsonLines {
        for r in records {
            serde_json::to_writer(&mut *out, &r.to_json())?;
            writeln!(out)?;
        }
        return Ok(());
    }
    if records.is_empty() {
        return Ok(());
    }
    let rows: Vec<_> = records.iter().map(Record::flat).collect();
    let cols = columns(&rows);
    let body: Vec<Vec<String>> = rows.iter().map(|r| cells(r, &cols)).collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(&cols)?;
            for row in &body {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Format::Table => {
            let mut widths: Vec<usize> = cols.iter().map(|c| c.len()).collect();
            for row in &body {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len().max(1));
                }
            }
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{:<w$}", if c.is_empty() { "-" } else { c.as_str() }))
                    .collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(&cols))?;
            for row in &body {
                writeln!(out, "{}", line(row))?;
            }
        }
        Format::JsonLines => unreachable!(),
    }
    Ok(())
}
