//! Feature file serialization.
//!
//! Two sibling formats carry extracted features: JSON-lines (one
//! [`FeatureRecord`] per line, the authoritative carrier of ids and labels)
//! and the flat FCF1 binary (magic bytes, little-endian u32 channel count,
//! then the f64 vectors back to back) for consumers that only need the
//! numbers.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::FeatureRecord;
use crate::util;

const FEATURE_MAGIC: &[u8; 4] = b"FCF1";

/// Write records as JSON-lines.
pub fn write_jsonl(path: &Path, records: &[FeatureRecord]) -> Result<()> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    util::write_atomic(path, out.as_bytes())
}

/// Read a JSON-lines feature file.
pub fn read_jsonl(path: &Path) -> Result<Vec<FeatureRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: FeatureRecord = serde_json::from_str(&line).map_err(|e| {
            Error::format(
                "feature file",
                format!("{}:{}: {e}", path.display(), lineno + 1),
            )
        })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::format(
            "feature file",
            format!("{}: no records", path.display()),
        ));
    }
    Ok(records)
}

/// Write the flat binary form. All records must share one dimension.
pub fn write_binary(path: &Path, records: &[FeatureRecord]) -> Result<()> {
    let dim = match records.first() {
        Some(first) => first.values.len(),
        None => return Err(Error::format("feature file", "no records to write")),
    };
    let mut bytes = Vec::with_capacity(8 + records.len() * dim * 8);
    bytes.extend_from_slice(FEATURE_MAGIC);
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    for record in records {
        if record.values.len() != dim {
            return Err(Error::shape(
                "feature binary",
                format!("{dim} values per record"),
                format!("record '{}' has {}", record.id, record.values.len()),
            ));
        }
        for &v in &record.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    util::write_atomic(path, &bytes)
}

/// Read the flat binary form back as raw vectors (ids and labels live only
/// in the JSON-lines sibling).
pub fn read_binary(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = [0u8; 8];
    file.read_exact(&mut header).map_err(|_| {
        Error::format(
            "feature binary",
            format!("{}: truncated header", path.display()),
        )
    })?;
    if &header[0..4] != FEATURE_MAGIC {
        return Err(Error::format(
            "feature binary",
            format!("{}: bad magic (expected FCF1)", path.display()),
        ));
    }
    let dim = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    if dim == 0 {
        return Err(Error::format(
            "feature binary",
            format!("{}: zero channel count", path.display()),
        ));
    }
    let mut payload = Vec::new();
    file.read_to_end(&mut payload)
        .map_err(|e| Error::io(path, e))?;
    let stride = dim * 8;
    if payload.is_empty() || payload.len() % stride != 0 {
        return Err(Error::format(
            "feature binary",
            format!(
                "{}: payload of {} bytes is not a multiple of {} (dim {})",
                path.display(),
                payload.len(),
                stride,
                dim
            ),
        ));
    }
    Ok(payload
        .chunks_exact(stride)
        .map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect())
}
