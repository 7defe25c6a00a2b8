//! Deterministic CSV emission: header row, 17 significant digits for floats,
//! UTF-8, LF line endings.

use std::io::Write;
use std::path::Path;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut buf = String::new();
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.join(","));
        buf.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(buf.as_bytes())
}
