//! Artifacts of a run: CSV tables and the JSON manifest.
//!
//! CSV files are UTF-8 with LF line endings and a header row; floats are
//! written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use tbvp_core::verify::Diagnostics;

use crate::error::{io_err, CliError};
use crate::problem::Tolerances;

/// A named CSV table.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Table {
            file: file.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{}", fmt_float(*v)).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(&self.file);
        fs::write(&path, self.render()).map_err(io_err(&path))
    }
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parse a table written by [`Table::render`].
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Invalid(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|e| {
                        CliError::Invalid(format!("{} line {}: {e}", path.display(), i + 2))
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(Table {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        header,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Solved and every check passed.
    Ok,
    /// Solved, but a declared tolerance was missed.
    Failed,
    /// Admissibility rejection.
    Rejected,
    /// Parse or I/O failure.
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub status: Status,
    pub reason: Option<String>,
    pub residual: Option<f64>,
    pub message: Option<String>,
    pub problem: Value,
    pub base_dir: Option<String>,
    pub admissibility: Value,
    pub tolerances: Option<Tolerances>,
    pub diagnostics: Option<Diagnostics>,
    pub solution: Value,
    pub velocity_table: Option<String>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            tool: "tbvp",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            status: Status::Error,
            reason: None,
            residual: None,
            message: None,
            problem: Value::Null,
            base_dir: None,
            admissibility: Value::Null,
            tolerances: None,
            diagnostics: None,
            solution: Value::Null,
            velocity_table: None,
            files: Vec::new(),
        }
    }

    pub fn fail_with(&mut self, err: &CliError) {
        self.status = if err.exit_code() == 2 { Status::Rejected } else { Status::Error };
        self.reason = Some(err.reason().to_string());
        self.residual = err.residual().filter(|r| r.is_finite());
        self.message = Some(err.to_string());
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Rejected => 2,
            Status::Failed | Status::Error => 1,
        }
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }
}
