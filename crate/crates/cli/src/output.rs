//! Output directory handling: CSV files stamped with the configuration hash
//! and a run manifest listing everything written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header_comment(config_hash: &str) -> String {
    format!("# config_hash={config_hash} version={VERSION}")
}

pub struct OutputDir {
    root: PathBuf,
    config_hash: String,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, config_hash: &str) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), config_hash: config_hash.to_string(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Records a file written by someone else.
    pub fn note(&mut self, name: &str) {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
    }

    /// Writes a CSV whose first line is the hash comment; `body` receives
    /// the remaining bytes.
    pub fn csv(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "{}", header_comment(&self.config_hash))?;
        body(&mut buf)?;
        self.write(name, &buf)
    }

    /// CSV from a header and rows of already formatted fields.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.csv(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.note(name);
        Ok(())
    }

    /// `manifest.toml`: command, hash, version and the files produced.
    pub fn finish(mut self, command: &str, config_toml: &str) -> Result<(), CliError> {
        self.write("config.resolved.toml", config_toml.as_bytes())?;
        let mut files = self.written.clone();
        files.sort();
        let mut manifest = toml::Table::new();
        manifest.insert("command".into(), command.into());
        manifest.insert("config_hash".into(), self.config_hash.clone().into());
        manifest.insert("version".into(), VERSION.into());
        manifest.insert("files".into(), toml::Value::Array(files.into_iter().map(Into::into).collect()));
        let text = toml::to_string(&manifest).expect("manifest serialises");
        let path = self.path("manifest.toml");
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Shortest round-trip representation, so reruns are byte identical.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), "abc").unwrap();
        out.table("t.csv", &["x", "y"], &[vec![num(1.5), num(f64::NAN)]]).unwrap();
        out.finish("test", "a = 1\n").unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, format!("# config_hash=abc version={VERSION}\nx,y\n1.5,\n"));
        let manifest: toml::Table = fs::read_to_string(dir.path().join("manifest.toml")).unwrap().parse().unwrap();
        assert_eq!(manifest["config_hash"].as_str(), Some("abc"));
        let files = manifest["files"].as_array().unwrap();
        assert_eq!(files.len(), 2);
    }
}
