//! CSV and JSON emission with byte-stable formatting.
//!
//! Floats are written with 9 significant digits in scientific notation so a
//! given config and version always produce byte-identical files. Files are
//! written once, atomically (write to a temporary sibling, then rename).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// 9-significant-digit scientific formatting; negative zero folds to zero.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000e0".into();
    }
    format!("{x:.8e}")
}

/// A CSV table: header plus float rows.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Write-then-rename so concurrent readers never observe a half-written file.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(content.as_bytes()).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}
