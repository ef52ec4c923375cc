//! CSV tables with a metadata trailer, and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, metadata: &[(String, String)]) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for (k, v) in metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out
    }
}

/// Everything a command produces, written only once the command has succeeded.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(PathBuf, String)>,
    pub stdout: Vec<String>,
}

impl Output {
    pub fn emit(&mut self, path: Option<PathBuf>, content: String) {
        match path {
            Some(p) => self.files.push((p, content)),
            None => self.stdout.push(content),
        }
    }

    pub fn commit(self) -> Result<(), CliError> {
        for (path, content) in &self.files {
            write_atomic(path, content)?;
        }
        if !self.stdout.is_empty() {
            let mut lock = std::io::stdout().lock();
            lock.write_all(self.stdout.join("\n").as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
        }
        Ok(())
    }
}

/// Writes to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(content.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `dir/name` next to `path`.
pub fn sibling(path: &Path, name: &str) -> PathBuf {
    path.with_file_name(name)
}
