//! Rendering of command reports as text, JSON or CSV.

use std::io::Write;

use clap::ValueEnum;
use serde_json::Value;

use crate::commands::CliError;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// A command result: a JSON document plus, for row-based commands, a CSV table.
pub struct Report {
    pub json: Value,
    /// Keys of `json` left out of the text rendering (bulky row lists).
    pub text_skip: &'static [&'static str],
    pub csv: Option<String>,
}

impl Report {
    pub fn new(json: Value) -> Self {
        Self {
            json,
            text_skip: &[],
            csv: None,
        }
    }
}

/// Serializes records to CSV with a header row.
pub fn to_csv<T: serde::Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn emit(report: &Report, format: Format) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    let text = match format {
        Format::Json => {
            serde_json::to_string_pretty(&report.json)
                .map_err(|e| CliError::Internal(e.to_string()))?
                + "\n"
        }
        Format::Csv => report.csv.clone().ok_or_else(|| {
            CliError::Usage("CSV output is available for density and parity-scan".into())
        })?,
        Format::Text => render_text(&report.json, report.text_skip),
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// One `key: value` line per top-level field; nested values as compact JSON.
fn render_text(value: &Value, skip: &[&str]) -> String {
    let Value::Object(map) = value else {
        return format!("{value}\n");
    };
    let width = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in map.iter().filter(|(k, _)| !skip.contains(&k.as_str())) {
        let shown = match v {
            Value::String(x) => x.clone(),
            other => other.to_string(),
        };
        s.push_str(&format!("{k:<width$}  {shown}\n"));
    }
    s
}
