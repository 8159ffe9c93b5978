//! Signal CSV files, JSON sidecars and reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use csf_core::simulate::FaultSimConfig;
use csf_core::{CsfConfig, FeatureVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::read_delimited;
use crate::pipeline::{AssessReport, ClassifyReport, FeatureConfig};

pub const SIGNAL_COLUMN: &str = "sample";

/// Writes a single-column CSV with header `sample`.
pub fn write_signal_csv(path: &Path, samples: &[f64]) -> Result<()> {
    write_csv(path, &[SIGNAL_COLUMN], samples.iter().map(|v| vec![v.to_string()]))
}

/// Reads the `sample` column of a CSV (or its only column when there is no
/// column of that name).
pub fn read_signal_csv(path: &Path) -> Result<Vec<f64>> {
    let (header, mut columns) = read_delimited(path, b',', true)?;
    let index = match header.iter().position(|h| h == SIGNAL_COLUMN) {
        Some(i) => i,
        None if columns.len() == 1 => 0,
        None => {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: format!("no '{SIGNAL_COLUMN}' column among {header:?}"),
            })
        }
    };
    if columns.is_empty() {
        return Err(Error::Parse { path: path.to_owned(), line: 2, message: "no data rows".into() });
    }
    Ok(columns.swap_remove(index))
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_write_error(path, e))?;
    writer.write_record(header).map_err(|e| csv_write_error(path, e))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| csv_write_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn csv_write_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Input(format!("{}: {kind:?}", path.display())),
    }
}

/// Square matrix as CSV without a header.
pub fn write_matrix_csv(path: &Path, matrix: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for row in matrix {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json { path: path.to_owned(), source: e })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_owned(), source: e })
}

/// `signal.csv` → `signal.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fault,
    Outlier,
}

/// Everything needed to regenerate a simulated signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSidecar {
    pub generator: String,
    pub version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub fault_config: Option<FaultSimConfig>,
    pub outlier_sigma: Option<f64>,
    pub measured_snr_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMethod {
    Csf,
    Med,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub method: FilterMethod,
    pub input: String,
    pub output: String,
    pub sample_rate_hz: f64,
    pub config: CsfConfig,
    pub w: Vec<f64>,
    /// Cost per accepted iterate; negative kurtosis for MED.
    pub cost_history: Vec<f64>,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub input: String,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesReport {
    pub features: FeatureConfig,
    pub sample_rate_hz: f64,
    /// CSF configuration when features were taken after filtering.
    pub filter: Option<CsfConfig>,
    pub records: Vec<FeatureRecord>,
}

/// Where the records of an assessment or classification came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Degradation { n_files: usize, onset: usize, base: FaultSimConfig },
    Taxonomy { per_class: usize, seed: u64, base: FaultSimConfig },
    ImsDirectory { path: String, channel: usize, sample_rate_hz: f64 },
    LabeledDirectory { path: String, sample_rate_hz: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessOutput {
    pub source: DataSource,
    pub features: FeatureConfig,
    pub filter: CsfConfig,
    /// One name per snapshot, in assessment order.
    pub names: Vec<String>,
    pub report: AssessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub source: DataSource,
    pub features: FeatureConfig,
    pub filter: CsfConfig,
    /// Class names indexed by the labels in `report.truth`.
    pub classes: Vec<String>,
    pub report: ClassifyReport,
}
