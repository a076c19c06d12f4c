//! Deterministic artifact emission: fixed-precision CSV with a
//! provenance header, JSON reports, and write-then-rename so partial
//! files are never left behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// 15 significant digits, `.` decimal separator.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.14e}")
}

/// Provenance header: tool version plus the canonical config echo, each
/// line `#`-prefixed. Contains no timestamps, so identical configs give
/// byte-identical artifacts.
pub fn provenance_header(config_echo: &str) -> String {
    let mut out = String::new();
    out.push_str(concat!("# t3k ", env!("CARGO_PKG_VERSION"), "\n"));
    out.push_str("# config:\n");
    for line in config_echo.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Recover the config echo from a provenance header (drops the leading
/// version and `config:` lines, strips the `# ` prefixes).
pub fn config_from_header(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines().skip(2) {
        let Some(rest) = line.strip_prefix('#') else { break };
        out.push_str(rest.strip_prefix(' ').unwrap_or(rest));
        out.push('\n');
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

/// Write atomically: to a sibling temp file first, then rename over the
/// target. LF line endings regardless of platform.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io_err(path))?;
        }
    }
    let tmp = path.with_extension("tmp");
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(content.as_bytes()).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// One CSV cell.
pub enum Cell {
    Float(f64),
    Int(i64),
    Str(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

/// CSV rows interleaved with `#`-prefixed comment lines (used to flag
/// skipped sweep points without breaking the column contract).
pub enum Row {
    Data(Vec<Cell>),
    Comment(String),
}

/// Assemble a CSV document: provenance header, column header, rows.
pub fn csv_document(config_echo: &str, columns: &[&str], rows: &[Row]) -> String {
    let mut out = provenance_header(config_echo);
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        match row {
            Row::Data(cells) => {
                let line: Vec<String> = cells
                    .iter()
                    .map(|c| match c {
                        Cell::Float(v) => fmt_float(*v),
                        Cell::Int(v) => v.to_string(),
                        Cell::Str(s) => s.clone(),
                    })
                    .collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            Row::Comment(text) => {
                out.push_str("# ");
                out.push_str(text);
                out.push('\n');
            }
        }
    }
    out
}

/// Resolve the output directory: flag beats `T3K_OUT_DIR` beats the
/// config value beats the current directory.
pub fn resolve_out_dir(flag: Option<&str>, config_dir: Option<&str>) -> PathBuf {
    if let Some(d) = flag {
        return PathBuf::from(d);
    }
    if let Ok(d) = std::env::var("T3K_OUT_DIR") {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    PathBuf::from(config_dir.unwrap_or("."))
}
