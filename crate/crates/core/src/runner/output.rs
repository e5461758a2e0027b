//! CSV and JSON persistence with a provenance header.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// SHA-256 of the canonical JSON encoding of a value.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn provenance_line(hash: &str, name: &str) -> String {
    format!("# nanoqed {VERSION} config_sha256={hash} name={name}\n")
}

/// Writes a CSV file: provenance comment, header, then rows.
pub fn write_csv(path: &Path, provenance: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).map_err(csv_error)?;
    for row in rows {
        writer.write_record(row).map_err(csv_error)?;
    }
    let body = writer.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let mut bytes = provenance.as_bytes().to_vec();
    bytes.extend_from_slice(&body);
    ensure_parent(path)?;
    fs::write(path, bytes)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

pub fn output_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}.{suffix}"))
}

/// Shortest round-trip decimal form, so identical numbers give identical bytes.
pub fn num(v: f64) -> String {
    format!("{v}")
}
