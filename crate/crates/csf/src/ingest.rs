//! Readers for delimited vibration files and the IMS run-to-failure layout:
//! one tab-separated row per sample, one column per channel, file name
//! `YYYY.MM.DD.HH.MM.SS`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use csf_core::Signal;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const IMS_ROW_COUNT: usize = 20480;
pub const IMS_SAMPLE_RATE_HZ: f64 = 20_000.0;
const IMS_TIMESTAMP_FORMAT: &str = "%Y.%m.%d.%H.%M.%S";

/// Reads an all-numeric delimited file into columns.
///
/// With `has_header`, the first row is returned separately as column names.
/// Rows must all have the same number of fields.
pub fn read_delimited(path: &Path, delimiter: u8, has_header: bool) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = if has_header {
        reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_owned)
            .collect()
    } else {
        Vec::new()
    };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); record.len()];
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_owned(),
                line,
                message: format!("'{field}' is not a number"),
            })?;
            col.push(value);
        }
    }
    Ok((header, columns))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse { path: path.to_owned(), line, message: format!("{kind:?}") },
    }
}

/// Timestamp encoded in an IMS file name, with or without an extension.
pub fn parse_ims_timestamp(name: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(name, IMS_TIMESTAMP_FORMAT).ok().or_else(|| {
        let stem = Path::new(name).file_stem()?.to_str()?;
        NaiveDateTime::parse_from_str(stem, IMS_TIMESTAMP_FORMAT).ok()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub path: PathBuf,
    pub timestamp: Option<NaiveDateTime>,
    /// Channels in file column order.
    pub channels: Vec<Vec<f64>>,
    pub sample_rate_hz: f64,
    pub warnings: Vec<String>,
}

impl SnapshotFile {
    pub fn n_rows(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn channel(&self, index: usize) -> Result<Signal> {
        let data = self.channels.get(index).ok_or_else(|| {
            Error::Input(format!(
                "{}: channel {index} requested but the file has {} column(s)",
                self.path.display(),
                self.channels.len()
            ))
        })?;
        Ok(Signal::new(data.clone(), self.sample_rate_hz)?)
    }
}

/// Reads one IMS snapshot. A row count other than 20480 is reported as a
/// warning, not an error.
pub fn read_ims_file(path: &Path, sample_rate_hz: f64) -> Result<SnapshotFile> {
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::Invalid(format!("sample rate must be positive, got {sample_rate_hz}")));
    }
    let (_, channels) = read_delimited(path, b'\t', false)?;
    if channels.is_empty() {
        return Err(Error::Parse { path: path.to_owned(), line: 1, message: "file has no data rows".into() });
    }
    let rows = channels[0].len();
    let mut warnings = Vec::new();
    if rows != IMS_ROW_COUNT {
        warnings.push(format!("{}: expected {IMS_ROW_COUNT} rows, found {rows}", path.display()));
    }
    let timestamp = path.file_name().and_then(|n| n.to_str()).and_then(parse_ims_timestamp);
    Ok(SnapshotFile { path: path.to_owned(), timestamp, channels, sample_rate_hz, warnings })
}

/// Writes channels in the IMS layout. Values use the shortest decimal form
/// that parses back to the same `f64`.
pub fn write_ims_file(path: &Path, channels: &[Vec<f64>]) -> Result<()> {
    let rows = channels.first().map_or(0, Vec::len);
    if channels.iter().any(|c| c.len() != rows) {
        return Err(Error::Invalid("all channels must have the same length".into()));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut line = String::new();
    for i in 0..rows {
        line.clear();
        for (c, channel) in channels.iter().enumerate() {
            if c > 0 {
                line.push('\t');
            }
            line.push_str(&channel[i].to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub path: PathBuf,
    pub timestamp: NaiveDateTime,
    pub signal: Signal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub path: PathBuf,
    pub message: String,
}

/// Outcome of walking a run-to-failure directory: snapshots in
/// chronological order plus the files that could not be used.
#[derive(Debug, Clone, Default)]
pub struct RunToFailure {
    pub snapshots: Vec<Snapshot>,
    pub errors: Vec<FileError>,
    pub warnings: Vec<String>,
}

/// Loads channel `channel` of every IMS file in `dir`, sorted by the
/// timestamp in the file name. Files are parsed in parallel; failures are
/// collected per file and do not stop the walk.
pub fn iterate_run_to_failure(dir: &Path, channel: usize, sample_rate_hz: f64) -> Result<RunToFailure> {
    let mut candidates = Vec::new();
    let mut errors = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        match path.file_name().and_then(|n| n.to_str()).and_then(parse_ims_timestamp) {
            Some(ts) => candidates.push((ts, path)),
            None => errors.push(FileError { path, message: "file name is not a YYYY.MM.DD.HH.MM.SS timestamp".into() }),
        }
    }
    if candidates.is_empty() && errors.is_empty() {
        return Err(Error::Input(format!("{}: directory contains no files", dir.display())));
    }
    candidates.sort();

    let parsed: Vec<_> = candidates
        .par_iter()
        .map(|(ts, path)| {
            read_ims_file(path, sample_rate_hz).and_then(|snap| {
                let signal = snap.channel(channel)?;
                Ok((Snapshot { path: path.clone(), timestamp: *ts, signal }, snap.warnings))
            })
        })
        .collect();

    let mut out = RunToFailure { errors, ..Default::default() };
    for ((_, path), result) in candidates.iter().zip(parsed) {
        match result {
            Ok((snapshot, warnings)) => {
                out.snapshots.push(snapshot);
                out.warnings.extend(warnings);
            }
            Err(e) => out.errors.push(FileError { path: path.clone(), message: e.to_string() }),
        }
    }
    if out.snapshots.is_empty() {
        return Err(Error::Input(format!("{}: no parseable IMS files", dir.display())));
    }
    Ok(out)
}
