use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::failure::CliError;

/// A named output file held in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            name: name.to_string(),
            bytes,
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that reads back to the same bits.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::config(format!("cannot serialize output: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::config(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| CliError::config(format!("csv: {e}")))
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}
