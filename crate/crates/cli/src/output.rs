//! CSV tables and run manifests, both written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

/// A rectangular table; cells are pre-formatted so output bytes are fixed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSeed {
    pub trial: usize,
    pub seed: u64,
    pub stream_id: u64,
}

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub subcommand: &'static str,
    /// The effective configuration, seed override and output path included.
    pub config: Value,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub csv: PathBuf,
    pub codes: Option<PathBuf>,
    pub trial_seeds: Vec<TrialSeed>,
    pub passed: bool,
    pub summary: Value,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = sibling(path, &format!(".tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    sibling(csv, ".manifest.json")
}

pub fn codes_path(csv: &Path) -> PathBuf {
    sibling(csv, ".codes.bin")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.0, -0.0, 1.0 / 3.0, 1e-300, 123456.789, f64::MIN_POSITIVE, -2.5e17] {
            assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_quotes_and_terminates_rows() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.to_csv().unwrap(), b"a,b\r\n\"x,y\",1\r\n");
    }

    #[test]
    fn sibling_paths() {
        let p = Path::new("/tmp/run.csv");
        assert_eq!(manifest_path(p), Path::new("/tmp/run.csv.manifest.json"));
        assert_eq!(codes_path(p), Path::new("/tmp/run.csv.codes.bin"));
    }
}
