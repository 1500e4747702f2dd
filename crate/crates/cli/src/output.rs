use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;

/// Output directory whose files are written through a temporary file and
/// renamed into place.
pub struct Output {
    dir: PathBuf,
    reproducible: bool,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, reproducible: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), reproducible, written: Vec::new() })
    }

    fn stamp(&self) -> Option<String> {
        if self.reproducible {
            return None;
        }
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Some(format!("# generated_unix_s={secs}\n"))
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        if let Some(s) = self.stamp() {
            tmp.write_all(s.as_bytes())?;
        }
        tmp.write_all(body.as_bytes())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// CSV body built row by row.
pub struct Table {
    body: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut body = header.join(",");
        body.push('\n');
        Self { body, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// `key=value` report lines.
#[derive(Default)]
pub struct Report {
    body: String,
}

impl Report {
    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.body, "{key}={value}");
    }

    pub fn finish(self) -> String {
        self.body
    }
}

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.9e}")
    }
}
