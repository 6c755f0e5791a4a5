//! CSV tables with `#` metadata headers, plus the run's `metadata.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{CliError, Result};

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Output {
    dir: PathBuf,
    header: Vec<(String, String)>,
    files: Vec<String>,
}

impl Output {
    /// `header` lines are repeated at the top of every table.
    pub fn new(dir: &Path, header: Vec<(String, String)>) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            header,
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn table(&mut self, name: &str, columns: &[&str]) -> Result<Table> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut raw = BufWriter::new(file);
        for (k, v) in &self.header {
            writeln!(raw, "# {k} = {v}").map_err(|e| CliError::io(&path, e))?;
        }
        let mut writer = csv::WriterBuilder::new().from_writer(raw);
        writer
            .write_record(columns)
            .map_err(|e| csv_error(&path, e))?;
        self.files.push(name.to_string());
        Ok(Table {
            writer,
            path,
            columns: columns.len(),
        })
    }

    pub fn write_metadata(&self, metadata: &Value) -> Result<PathBuf> {
        let path = self.dir.join("metadata.json");
        let mut text = serde_json::to_string_pretty(metadata).expect("metadata serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let io = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::io(path, io)
}

pub struct Table {
    writer: csv::Writer<BufWriter<File>>,
    path: PathBuf,
    columns: usize,
}

impl Table {
    pub fn row<S: AsRef<[u8]>>(&mut self, cells: &[S]) -> Result<()> {
        debug_assert_eq!(cells.len(), self.columns, "row width differs from header");
        self.writer
            .write_record(cells)
            .map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_digits() {
        for &x in &[0.1, -1.0 / 3.0, 6.02214076e23, 5e-324] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
