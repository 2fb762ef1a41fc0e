//! Plain-text table and report writers.
//!
//! CSV files carry a header row, '.' decimal separators and full double
//! precision (Rust's shortest round-trip formatting). Comment lines start
//! with '#'; the generation timestamp is one of them and can be suppressed
//! so that reruns are byte-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// Whether output files carry a `# generated: <RFC 3339>` comment line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timestamp {
    Include,
    Suppress,
}

impl Timestamp {
    pub fn line(&self) -> Option<String> {
        match self {
            Timestamp::Include => Some(format!(
                "# generated: {}",
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
            )),
            Timestamp::Suppress => None,
        }
    }

    pub fn rfc3339(&self) -> Option<String> {
        match self {
            Timestamp::Include => Some(
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            ),
            Timestamp::Suppress => None,
        }
    }
}

pub struct CsvWriter {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl CsvWriter {
    pub fn create(path: &Path, timestamp: Timestamp) -> Result<Self, CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        if let Some(line) = timestamp.line() {
            writeln!(writer, "{line}").map_err(|e| CliError::from_io(path, e))?;
        }
        Ok(Self {
            writer,
            path: path.to_path_buf(),
        })
    }

    pub fn comment(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.writer, "# {text}").map_err(|e| CliError::from_io(&self.path, e))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        writeln!(self.writer, "{}", fields.join(",")).map_err(|e| CliError::from_io(&self.path, e))
    }

    pub fn header(&mut self, columns: &[&str]) -> Result<(), CliError> {
        writeln!(self.writer, "{}", columns.join(","))
            .map_err(|e| CliError::from_io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer
            .flush()
            .map_err(|e| CliError::from_io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Shortest round-trip decimal form of an `f64`.
pub fn fmt(value: f64) -> String {
    format!("{value}")
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<PathBuf, CliError> {
    let mut value = value.clone();
    // a suppressed timestamp is omitted, not serialized as null
    if let Some(map) = value.as_object_mut() {
        if map.get("generated_at").map(|v| v.is_null()).unwrap_or(false) {
            map.remove("generated_at");
        }
    }
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}
