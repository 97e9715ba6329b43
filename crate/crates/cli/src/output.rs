//! CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use crate::RunError;

/// 17 significant digits, enough to round-trip any double.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn nums(&mut self, values: &[f64]) {
        self.row(values.iter().map(|v| num(*v)).collect());
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let io = |e: csv::Error| RunError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    }
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(root).map_err(|e| RunError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), RunError> {
        table.write(&self.root.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> Result<(), RunError> {
        let path = self.root.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}
