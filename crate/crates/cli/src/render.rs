//! Output assembly for the three formats.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, Settings};

/// One command's result in every format.
pub struct Output {
    pub command: &'static str,
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub text: String,
}

impl Output {
    pub fn new<T: Serialize>(command: &'static str, result: &T) -> Result<Self, String> {
        Ok(Output {
            command,
            json: serde_json::to_value(result).map_err(|e| e.to_string())?,
            header: Vec::new(),
            rows: Vec::new(),
            text: String::new(),
        })
    }

    pub fn table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.header = header;
        self.rows = rows;
        self
    }

    pub fn text(mut self, text: String) -> Self {
        self.text = text;
        self
    }

    fn bytes(&self, format: Format) -> Result<Vec<u8>, String> {
        match format {
            Format::Json => {
                let doc = json!({ "command": self.command, "result": self.json });
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| e.to_string())?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).map_err(|e| e.to_string())?;
                for row in &self.rows {
                    w.write_record(row).map_err(|e| e.to_string())?;
                }
                w.into_inner().map_err(|e| e.to_string())
            }
            Format::Text => Ok(self.text.clone().into_bytes()),
        }
    }

    pub fn emit(&self, settings: &Settings) -> Result<(), String> {
        let bytes = self.bytes(settings.format)?;
        match &settings.output {
            Some(path) => std::fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
            None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
        }
    }
}

/// CSV cell for a number; empty for `None`.
pub fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Text rendering of an optional number.
pub fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.10}")).unwrap_or_else(|| "-".into())
}
