//! CSV and JSON writers. Floats are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::Format;
use super::CliError;

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// RFC 4180 text with CRLF line endings.
    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        for line in std::iter::once(&self.header).chain(&self.rows) {
            w.write_record(line).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("cells are UTF-8")
    }
}

/// Everything a command produces: one JSON document and a set of tables.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: String,
    pub tables: Vec<CsvTable>,
}

impl Report {
    pub fn new<T: Serialize>(doc: &T, tables: Vec<CsvTable>) -> Result<Self, CliError> {
        let json = serde_json::to_string_pretty(doc).map_err(|e| CliError::Numeric(format!("serialization: {e}")))?;
        Ok(Self {
            json: json + "\n",
            tables,
        })
    }
}

/// Write a report. JSON goes to `path` or stdout; CSV needs a directory
/// `path` and writes one `<table>.csv` per table into it.
pub fn write_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match (format, path) {
        (Format::Json, None) => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(report.json.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
        (Format::Json, Some(p)) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            fs::write(p, &report.json).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        (Format::Csv, None) => Err(CliError::Config(
            "CSV output writes several files; pass --out <directory>".to_string(),
        )),
        (Format::Csv, Some(dir)) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for t in &report.tables {
                let file = dir.join(format!("{}.csv", t.name));
                fs::write(&file, t.render()).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
            }
            Ok(())
        }
    }
}
