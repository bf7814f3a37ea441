//! Tabular CSV/JSON writers. Every artifact carries the resolved-config hash.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Int(u64),
    Num(f64),
    Text(String),
    Empty,
}

impl Field {
    /// Shortest text that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Field::Int(i) => i.to_string(),
            Field::Num(x) => format!("{x:?}"),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<u64> for Field {
    fn from(i: u64) -> Self {
        Field::Int(i)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_owned())
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| (*c).to_owned()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Prepends a `config_hash` column.
    pub fn with_hash(mut self, hash: &str) -> Self {
        self.columns.insert(0, "config_hash".into());
        for row in &mut self.rows {
            row.insert(0, Field::Text(hash.to_owned()));
        }
        self
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::render))?;
        }
        w.into_inner().map_err(|e| CliError::Config(format!("csv buffer: {e}")))
    }
}

/// Everything needed to reproduce an artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub config: RunConfig,
}

impl Metadata {
    pub fn new(command: &str, config: &RunConfig, seed: Option<u64>) -> Self {
        Self {
            command: command.to_owned(),
            config_hash: config.hash(),
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            config: config.clone(),
        }
    }
}

/// A command's output: the table plus the native result for JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub metadata: Metadata,
    pub table: Table,
    pub result: Value,
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `out.csv` → `out.config.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.config.json"))
}

pub fn render(artifact: &Artifact, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => artifact.table.clone().with_hash(&artifact.metadata.config_hash).to_csv(),
        Format::Json => {
            let mut text = serde_json::to_vec_pretty(artifact).expect("artifact serializes");
            text.push(b'\n');
            Ok(text)
        }
    }
}

/// Writes the artifact to `path` (stdout when `None`) plus, for files, a
/// resolved-config echo beside it.
pub fn write_table(artifact: &Artifact, format: Format, path: Option<&Path>) -> CliResult<()> {
    let bytes = render(artifact, format)?;
    match path {
        Some(p) => {
            write_file(p, &bytes)?;
            let mut echo = serde_json::to_vec_pretty(&artifact.metadata).expect("metadata serializes");
            echo.push(b'\n');
            write_file(&sidecar_path(p), &echo)
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes).and_then(|_| out.flush()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 12345.678901234567] {
            let text = Field::Num(x).render();
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{text}");
        }
    }

    #[test]
    fn csv_has_header_and_newline_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Field::Num(0.5), Field::Empty]);
        let text = String::from_utf8(t.with_hash("h").to_csv().unwrap()).unwrap();
        assert_eq!(text, "config_hash,a,b\nh,0.5,\n");
    }

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(sidecar_path(Path::new("dir/out.csv")), PathBuf::from("dir/out.config.json"));
    }
}
