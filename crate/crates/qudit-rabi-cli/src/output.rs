//! CSV/JSON output: fixed-precision float formatting and atomic writes.

use std::io;
use std::path::Path;

/// Columnar table rendered as UTF-8 CSV with a header row; every column name
/// carries its unit in brackets. Floats are printed with 12 significant
/// digits so identical runs produce identical bytes.
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format_float(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// 12 significant digits, scientific; NaN marks analytically undefined
/// entries (e.g. strong-coupling energies at zero coupling).
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.11e}")
    }
}

/// Write through a temporary sibling and rename, so readers never observe a
/// partially written file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
