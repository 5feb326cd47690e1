//! JSON-lines report records and atomic file output.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use crate::format::{self, Instance};
use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One report line: what ran, on which input, with which settings.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub config: Json,
    pub result: Json,
}

/// An input file read once, keeping its hash for reports.
pub struct Input {
    pub path: PathBuf,
    pub sha256: String,
    pub instance: Instance,
}

pub fn read_instance(path: &Path, strict: bool) -> Result<Input, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let text = String::from_utf8_lossy(&bytes);
    let instance =
        format::parse(&text, strict).map_err(|source| CliError::Format { path: path.to_owned(), source })?;
    Ok(Input { path: path.to_owned(), sha256: sha256_hex(&bytes), instance })
}

/// Writes `contents` to `path` through a temporary file in the same directory,
/// or to stdout when `path` is `None`.
pub fn write_atomic(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        print!("{contents}");
        return Ok(());
    };
    let io = |source| CliError::Io { path: path.to_owned(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Appends one JSON line to `path`, or prints it when `path` is `None`.
pub fn emit(path: Option<&Path>, record: &impl Serialize) -> Result<(), CliError> {
    let mut line = serde_json::to_string(record).expect("records always serialize");
    line.push('\n');
    match path {
        None => {
            print!("{line}");
            Ok(())
        }
        Some(p) => {
            let io = |source| CliError::Io { path: p.to_owned(), source };
            let mut f = OpenOptions::new().create(true).append(true).open(p).map_err(io)?;
            f.write_all(line.as_bytes()).map_err(io)
        }
    }
}
