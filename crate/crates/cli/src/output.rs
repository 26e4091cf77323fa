//! Output files: a directory per run, `#` metadata headers, fixed number
//! formatting.

use crate::error::CliError;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Where a command writes, plus the metadata stamped on every file.
pub struct Sink {
    pub dir: PathBuf,
    header: Vec<String>,
}

impl Sink {
    /// `root/label/command`, created on demand.
    pub fn new(root: &Path, label: &str, command: &str, config_hash: &str, settings: &[(String, String)]) -> Result<Self, CliError> {
        let dir = root.join(label).join(command);
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let mut header = vec![
            format!("tool: chainlab {VERSION}"),
            format!("command: {command}"),
            format!("config_sha256: {config_hash}"),
        ];
        header.extend(settings.iter().map(|(k, v)| format!("{k}: {v}")));
        Ok(Self { dir, header })
    }

    fn open(&self, name: &str) -> Result<(fs::File, PathBuf), CliError> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        for line in &self.header {
            writeln!(f, "# {line}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        Ok((f, path))
    }

    /// Writes a CSV table after the metadata lines.
    pub fn csv(&self, name: &str, columns: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf, CliError> {
        let (f, path) = self.open(name)?;
        let mut w = csv::Writer::from_writer(f);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(columns).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }

    /// Writes a plain-text report after the metadata lines.
    pub fn text(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let (mut f, path) = self.open(name)?;
        f.write_all(body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(path)
    }
}
