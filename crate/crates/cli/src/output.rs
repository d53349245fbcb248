use anyhow::{Context, Result};
use serde_json::Value;
use std::io::Write;
use std::path::Path;

/// Float cell with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    pub suffix: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(suffix: &'static str, header: &[&'static str]) -> Self {
        Self { suffix, header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, command: &str) -> String {
        if self.suffix.is_empty() {
            format!("{command}.csv")
        } else {
            format!("{command}_{}.csv", self.suffix)
        }
    }
}

/// Named pass/fail assertions of one run.
#[derive(Default)]
pub struct Checks(pub Vec<(String, bool)>);

impl Checks {
    pub fn add(&mut self, name: impl Into<String>, pass: bool) {
        self.0.push((name.into(), pass));
    }

    pub fn pass(&self) -> bool {
        self.0.iter().all(|(_, p)| *p)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.0.iter().map(|(n, p)| serde_json::json!({ "name": n, "pass": p })).collect())
    }
}

pub struct Outcome {
    pub tables: Vec<Table>,
    pub result: Value,
    pub provenance: Value,
    pub checks: Checks,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

pub fn write_table(dir: &Path, command: &str, t: &Table) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    let name = t.file_name(command);
    write_atomic(&dir.join(&name), &w.into_inner()?)?;
    Ok(name)
}

pub fn write_json(dir: &Path, command: &str, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_atomic(&dir.join(format!("{command}.json")), s.as_bytes())
}
