//! Line-delimited JSON record files: one object per line, append-only.
//!
//! A final line without a terminating newline is a write that never
//! completed; readers ignore it and writers cut it off before appending.

use std::fs::{self, File, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::AnalyticsError;

fn unavailable(path: &Path, e: impl std::fmt::Display) -> AnalyticsError {
    AnalyticsError::StoreUnavailable(format!("{}: {e}", path.display()))
}

/// Reads every complete record of `path`; a missing file holds no records.
pub fn read_records<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, AnalyticsError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(unavailable(path, e)),
    };
    let complete = match bytes.iter().rposition(|&b| b == b'\n') {
        Some(i) => &bytes[..=i],
        None => &[][..],
    };
    let mut out = Vec::new();
    for (i, line) in complete.split(|&b| b == b'\n').enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let rec = serde_json::from_slice(line).map_err(|e| AnalyticsError::MalformedRecord {
            path: path.display().to_string(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Opens `path` for appending, dropping any incomplete trailing line.
pub(crate) fn open_for_append(path: &Path) -> Result<File, AnalyticsError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| unavailable(path, e))?;
    }
    let mut file = OpenOptions::new()
        .read(true)
        .write(true)
        .create(true)
        .truncate(false)
        .open(path)
        .map_err(|e| unavailable(path, e))?;
    let bytes = fs::read(path).map_err(|e| unavailable(path, e))?;
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if keep != bytes.len() {
        file.set_len(keep as u64)
            .map_err(|e| unavailable(path, e))?;
    }
    file.seek(SeekFrom::End(0))
        .map_err(|e| unavailable(path, e))?;
    Ok(file)
}

/// Appends one record and syncs it to disk before returning.
pub fn append_record<R: Serialize>(
    file: &mut File,
    path: &Path,
    record: &R,
) -> Result<(), AnalyticsError> {
    let mut line = serde_json::to_vec(record).map_err(|e| unavailable(path, e))?;
    line.push(b'\n');
    file.write_all(&line).map_err(|e| unavailable(path, e))?;
    file.sync_data().map_err(|e| unavailable(path, e))?;
    Ok(())
}
