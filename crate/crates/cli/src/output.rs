//! Report rendering and atomic output.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

/// A command result in a shape every output format can render: the full JSON
/// document, plus a flat table (`header`/`rows`) and scalar `summary` lines
/// for the CSV and plain-text views.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(json: Value) -> Self {
        Report {
            json,
            header: Vec::new(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn header<I, S>(mut self, columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.header = columns.into_iter().map(Into::into).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn summary(mut self, key: &str, value: impl ToString) -> Self {
        self.summary.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self, format: OutputFormat) -> anyhow::Result<String> {
        match format {
            OutputFormat::Json => Ok(serde_json::to_string(&self.json)? + "\n"),
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Table => Ok(self.render_table()),
        }
    }

    /// The row table when there is one, otherwise `key,value` pairs.
    fn render_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.header.is_empty() {
            w.write_record(["key", "value"])?;
            for (k, v) in &self.summary {
                w.write_record([k, v])?;
            }
        } else {
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    fn render_table(&self) -> String {
        let mut out = String::new();
        let key_width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.summary {
            out += &format!("{k:<key_width$}  {v}\n");
        }
        if self.header.is_empty() {
            return out;
        }
        if !self.summary.is_empty() {
            out.push('\n');
        }
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for r in &self.rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        out += &line(&self.header);
        out += &line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>());
        for r in &self.rows {
            out += &line(r);
        }
        out
    }
}

/// Writes to stdout, or to `path` via a temporary file in the same
/// directory that is renamed into place.
pub fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        return Ok(stdout.flush()?);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Fixed-precision float for the table view.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}
