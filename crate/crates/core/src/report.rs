//! Deterministic CSV/JSON rendering and atomic file output.
//!
//! Floats are always printed with 17 significant digits in scientific form so
//! two runs with identical inputs produce byte-identical artifacts.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

/// `x` with 17 significant digits, e.g. `2.3837669797222219e-13`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number carrying the 17-digit rendering of `x` (`null` if non-finite).
pub fn json_f64(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    sig17(x)
        .parse::<Number>()
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Insertion-ordered JSON object builder.
#[derive(Debug, Default, Clone)]
pub struct JsonObject(Map<String, Value>);

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_owned(), value.into());
        self
    }

    pub fn float(self, key: &str, x: f64) -> Self {
        self.field(key, json_f64(x))
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }

    pub fn render(self) -> String {
        let mut s = serde_json::to_string_pretty(&self.into_value()).expect("JSON value");
        s.push('\n');
        s
    }
}

/// Comma-separated table with a header row and `\n` line endings.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| (*h).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.push(row.iter().map(|x| sig17(*x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "CSV row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes `contents` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "no file name"))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
