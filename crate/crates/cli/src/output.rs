use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Row-oriented result table. Cells are preformatted so CSV output is
/// byte-stable.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Structured output of one invocation. Wall time is reported on stderr
/// only, so records from identical invocations compare equal.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub results: Value,
}

impl RunRecord {
    pub fn new(command: &str, config: Value, seed: Option<u64>, results: Value) -> Self {
        Self {
            command: format!("optqft {command}"),
            config,
            seed,
            version: format!("optqft-v{}", env!("CARGO_PKG_VERSION")),
            results,
        }
    }
}

pub struct Output {
    pub summary: String,
    pub table: Table,
    pub record: RunRecord,
    /// Native text artifact, written instead of the table in CSV mode.
    pub text: Option<String>,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.text.clone().unwrap_or_else(|| self.table.to_csv()),
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.record).expect("record is valid JSON");
                s.push('\n');
                s
            }
        }
    }
}

/// Formats a float so that it parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn summary_line(s: &mut String, text: impl AsRef<str>) {
    let _ = writeln!(s, "{}", text.as_ref());
}

/// `dir/stem` with parent directories created.
pub fn sibling(dir: &Path, name: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}
