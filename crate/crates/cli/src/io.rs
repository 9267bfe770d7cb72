//! Delimiter-separated text: one vector per line, decimal literals, an
//! optional header line.

use std::fs;
use std::path::Path;

use crate::args::TextFormat;
use crate::error::{CliError, CliResult};

pub fn read_rows(path: &Path, format: &TextFormat) -> CliResult<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_rows(&text, format).map_err(|msg| CliError::Io(format!("{}: {msg}", path.display())))
}

pub fn parse_rows(text: &str, format: &TextFormat) -> Result<Vec<Vec<f64>>, String> {
    let blank = format.delimiter.trim().is_empty();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(usize::from(format.header)) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = if blank {
            line.split_whitespace().collect()
        } else {
            line.split(format.delimiter.as_str())
                .map(str::trim)
                .collect()
        };
        let row = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format!("line {}: malformed number {f:?}", i + 1))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!(
                    "line {}: {} fields, expected {}",
                    i + 1,
                    row.len(),
                    first.len()
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(rows)
}

pub fn format_rows<'a>(rows: impl IntoIterator<Item = &'a [f64]>, delimiter: &str) -> String {
    let sep = if delimiter.is_empty() { " " } else { delimiter };
    let mut out = String::new();
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(sep));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
