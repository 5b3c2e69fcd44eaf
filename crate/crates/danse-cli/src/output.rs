//! Plot-ready data files.
//!
//! Both formats round-trip exactly: CSV stores every float with 17
//! significant digits (enough to reconstruct any `f64` bit pattern), and the
//! JSON path uses a parser that reads back the shortest-round-trip encoding
//! losslessly. Files are written atomically (temp file in the target
//! directory, then rename), so readers never observe a half-written file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::OutputFormat;

/// Formats a float with 17 significant digits, which round-trips every f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a float written by [`format_float`] (or any decimal float).
pub fn parse_float(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|e| CliError::Invalid(format!("bad float {text:?}: {e}")))
}

/// Filename-safe token for a parameter value: `0.001` → `0p001`, `-2` →
/// `m2`, integers stay bare. Deterministic across runs (uses the shortest
/// exact decimal representation).
pub fn value_token(x: f64) -> String {
    let mut token = format!("{x}");
    if token.len() > 24 {
        // Extreme magnitudes: exponent notation keeps the name short.
        token = format!("{x:e}");
    }
    token.replace('.', "p").replace('-', "m")
}

/// Writes `bytes` to `path` atomically via a temp file plus rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// A rectangular numeric table with named columns — the shape of every data
/// file the tool emits (curves, profiles, summaries, rescaled curves).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    /// Row-major values; every row has `columns.len()` entries.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Invalid(format!("missing column `{name}`")))
    }

    pub fn to_csv(&self) -> String {
        let mut text = String::new();
        text.push_str("# ");
        text.push_str(&self.columns.join(","));
        text.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
            text.push_str(&fields.join(","));
            text.push('\n');
        }
        text
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut columns = None;
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                // First header line names the columns; later ones are comments.
                if columns.is_none() {
                    columns = Some(
                        header
                            .trim()
                            .split(',')
                            .map(|c| c.trim().to_string())
                            .collect::<Vec<_>>(),
                    );
                }
                continue;
            }
            let row = line
                .split(',')
                .map(parse_float)
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let columns =
            columns.ok_or_else(|| CliError::Invalid("csv file has no `#` header".into()))?;
        for row in &rows {
            if row.len() != columns.len() {
                return Err(CliError::Invalid(format!(
                    "csv row has {} fields, header names {} columns",
                    row.len(),
                    columns.len()
                )));
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("table serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Serializes in the given format.
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Writes the table atomically to `path` in the given format.
    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        atomic_write(path, self.render(format).as_bytes())
    }

    /// Reads a table back, choosing the parser by file extension.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        let parsed = if is_json {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        };
        parsed.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}
