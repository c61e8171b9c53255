//! CSV tables: a `#` comment line, a header, then one record per row.
//! Floats carry 17 significant digits so that reading them back is exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(usize::from(v))
    }
}

pub struct Table {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(comment: impl Into<String>, header: &[&str]) -> Self {
        Self {
            comment: comment.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

fn unwritable(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

/// Writes `table` to `path`. Rows must all match the header width.
pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    let width = table.header.len();
    if let Some(i) = table.rows.iter().position(|r| r.len() != width) {
        return Err(CliError::Compute(format!(
            "row {i} has {} cells, header has {width}",
            table.rows[i].len()
        )));
    }
    let file = File::create(path).map_err(|e| unwritable(path, e))?;
    let mut out = BufWriter::new(file);
    for line in table.comment.lines() {
        writeln!(out, "# {line}").map_err(|e| unwritable(path, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(&table.header).map_err(|e| unwritable(path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))
            .map_err(|e| unwritable(path, e))?;
    }
    w.flush().map_err(|e| unwritable(path, e))?;
    Ok(())
}

/// Reads a table written by [`emit_csv`]: comment lines, header, records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let file = File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let header = r
        .headers()
        .map_err(|e| CliError::Config(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_csv(&Table::new("units: none", &["a", "b"]), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "# units: none\na,b\n");
    }

    #[test]
    fn values_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let values = [
            0.0,
            -0.0,
            1.0 / 3.0,
            -3.7370484108528083e-28,
            f64::MIN_POSITIVE,
            6.02214076e23,
        ];
        let mut t = Table::new("x", &["i", "v", "label"]);
        for (i, v) in values.iter().enumerate() {
            t.push(vec![i.into(), (*v).into(), "a,b".into()]);
        }
        emit_csv(&t, &path).unwrap();
        let (header, rows) = read_csv(&path).unwrap();
        assert_eq!(header, vec!["i", "v", "label"]);
        for (row, v) in rows.iter().zip(values) {
            assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), v.to_bits());
            assert_eq!(row[2], "a,b");
        }
        assert!(std::fs::read_to_string(&path).unwrap().ends_with('\n'));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![1usize.into()]);
        assert!(emit_csv(&t, &dir.path().join("t.csv")).is_err());
    }

    #[test]
    fn unwritable_path() {
        let err = emit_csv(&Table::new("x", &["a"]), Path::new("/nonexistent-dir/t.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
