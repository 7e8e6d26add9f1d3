//! Run manifests and on-disk result bundles.
//!
//! A bundle directory holds `manifest.toml`, one CSV per table, an optional
//! `summary.json`, and the `COMPLETE` sentinel, written last. A directory
//! without the sentinel is partial output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GENERATOR_NAME: &str = "kinex";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SENTINEL_FILE: &str = "COMPLETE";

/// Everything needed to replay a run. The timestamp is taken from
/// `SOURCE_DATE_EPOCH` only, so repeated runs stay byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub artifact_version: String,
    pub generator: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub config: Config,
}

impl RunManifest {
    pub fn new(command: &str, config: Config) -> Self {
        let timestamp_unix = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok());
        Self {
            artifact_version: ARTIFACT_VERSION.to_owned(),
            generator: GENERATOR_NAME.to_owned(),
            command: command.to_owned(),
            seed: config.seed,
            config_hash: config.hash(),
            timestamp_unix,
            config,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes to TOML")
    }

    /// Parses a manifest and checks that its hash and seed match its config.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string().trim_end().to_owned(),
        })?;
        let bad = |message: String| Error::Format {
            path: path.to_owned(),
            message,
        };
        if m.config.hash() != m.config_hash {
            return Err(bad(format!("config_hash {} does not match the embedded config", m.config_hash)));
        }
        if m.config.seed != m.seed {
            return Err(bad(format!("seed {} differs from config.seed {}", m.seed, m.config.seed)));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// Floats use 17 significant digits in scientific notation.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// One CSV file. Column names carry their unit in brackets, `[1]` for
/// dimensionless quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_owned(),
            columns: columns.iter().map(|&c| c.to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => Error::io(path, e),
            other => Error::Format {
                path: path.to_owned(),
                message: format!("{other:?}"),
            },
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)
            .map_err(io)?;
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct ResultBundle {
    pub manifest: RunManifest,
    pub tables: Vec<Table>,
    pub summary: Option<serde_json::Value>,
}

impl ResultBundle {
    pub fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            tables: Vec::new(),
            summary: None,
        }
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents).map_err(|e| Error::io(path, e))
}

/// Writes the bundle under `out_dir` and returns the files written, sentinel last.
pub fn emit(bundle: &ResultBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let sentinel = out_dir.join(SENTINEL_FILE);
    match fs::remove_file(&sentinel) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(&sentinel, e)),
    }
    let mut written = Vec::new();

    let path = out_dir.join(MANIFEST_FILE);
    write_file(&path, bundle.manifest.to_toml().as_bytes())?;
    written.push(path);

    for t in &bundle.tables {
        let path = out_dir.join(t.file_name());
        t.write_to(&path)?;
        written.push(path);
    }

    if let Some(summary) = &bundle.summary {
        let path = out_dir.join(SUMMARY_FILE);
        let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        written.push(path);
    }

    write_file(&sentinel, format!("{}\n", bundle.manifest.config_hash).as_bytes())?;
    written.push(sentinel);
    Ok(written)
}
