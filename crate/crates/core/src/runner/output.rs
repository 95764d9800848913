//! CSV tables, content hashes and the run manifest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

use super::RunError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// UTF-8, comma separated, header row, LF line endings.
pub fn csv_bytes(headers: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, RunError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| RunError::Io(format!("csv encoding: {e}"));
    w.write_record(headers).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| RunError::Io(format!("csv encoding: {e}")))
}

/// Parsed CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(bytes: &[u8]) -> Result<Self, RunError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let bad = |e: csv::Error| RunError::Io(format!("csv parse: {e}"));
        let headers = r.headers().map_err(bad)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(bad)?;
        Ok(Self { headers, rows })
    }

    pub fn read(path: &Path) -> Result<Self, RunError> {
        let bytes = fs::read(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&bytes)
    }

    fn index(&self, name: &str) -> Result<usize, RunError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RunError::Io(format!("missing column '{name}'")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<&str>, RunError> {
        let i = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>, RunError> {
        self.column(name)?
            .into_iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| RunError::Io(format!("column '{name}': '{v}': {e}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Completeness {
    pub total_cells: usize,
    pub complete_cells: usize,
    /// Human-readable identifiers of incomplete or diverged cells.
    pub incomplete: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// RFC 3339 / ISO-8601 UTC timestamps.
    pub started_at: String,
    pub finished_at: String,
    pub wall_seconds: f64,
    pub workers: usize,
    pub config: serde_json::Value,
    /// Hash of the canonical JSON of `command` and `config`.
    pub config_sha256: String,
    pub files: Vec<FileRecord>,
    pub completeness: Completeness,
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    }

    /// Re-hashes every referenced file.
    pub fn verify(&self, dir: &Path) -> Result<(), RunError> {
        for f in &self.files {
            let bytes = fs::read(dir.join(&f.name)).map_err(|e| RunError::Io(format!("{}: {e}", f.name)))?;
            let got = sha256_hex(&bytes);
            if got != f.sha256 {
                return Err(RunError::Io(format!(
                    "{}: hash {got} does not match manifest {}",
                    f.name, f.sha256
                )));
            }
        }
        Ok(())
    }
}

pub fn config_hash(command: &str, config: &serde_json::Value) -> String {
    let canonical = serde_json::json!({ "command": command, "config": config });
    sha256_hex(canonical.to_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_round_trips_floats() {
        let vals = [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::NAN];
        let rows: Vec<Vec<String>> = vals.iter().map(|&v| vec![fmt_f64(v), "x,y".into()]).collect();
        let bytes = csv_bytes(&["value", "label"], &rows).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("value,label\n"));
        assert!(!text.contains('\r'));
        let t = CsvTable::parse(&bytes).unwrap();
        let back = t.column_f64("value").unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
        assert_eq!(t.column("label").unwrap()[0], "x,y");
        assert!(t.column("missing").is_err());
    }

    #[test]
    fn known_hash() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
