use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dmt_core::Error as CoreError;
use tempfile::NamedTempFile;

/// Error raised for option values clap cannot check on its own.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

/// Input documents that do not parse.
#[derive(Debug)]
pub struct Schema(pub String);

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Schema {}

pub fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return (2, "usage");
        }
        if cause.is::<Schema>() {
            return (3, "schema");
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::Schema(_) | CoreError::InvalidTree(_) => (3, "schema"),
                CoreError::Io(_) => (5, "io"),
                _ => (4, "numeric"),
            };
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            return if e.is_io_error() { (5, "io") } else { (3, "schema") };
        }
        if let Some(e) = cause.downcast_ref::<image::ImageError>() {
            return match e {
                image::ImageError::IoError(_) => (5, "io"),
                _ => (3, "schema"),
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<tempfile::PersistError>() {
            return (5, "io");
        }
    }
    (4, "numeric")
}

/// One JSON object on a single line.
pub fn error_line(code: u8, kind: &str, err: &anyhow::Error) -> String {
    let message = format!("{err:#}");
    serde_json::json!({ "error": { "code": code, "kind": kind, "message": message } }).to_string()
}

/// Files to be written together once every output has been computed.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    /// Writes every file through a temporary file in the target directory,
    /// then renames them all into place.
    pub fn commit(self) -> Result<()> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, contents) in self.files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = NamedTempFile::new_in(&dir).with_context(|| format!("creating a file in {}", dir.display()))?;
            tmp.write_all(&contents).with_context(|| format!("writing {}", path.display()))?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path).with_context(|| format!("moving output into {}", path.display()))?;
        }
        Ok(())
    }
}

/// `<output>` with its extension replaced by `suffix`.
pub fn beside(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}{suffix}"))
}
