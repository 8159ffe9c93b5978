//! Two-branch processing: every record is described once as measured and
//! once after simplified-CSF filtering, and both branches go through the
//! same health models.

use csf_core::features::{extract_feature_vector_with_mode, BlehnrMode, FaultFrequencies, FeatureVector};
use csf_core::health::{
    alarm_index, euclidean_distances, kmeans, leave_one_out_mqe, pca_fit_transform, purity, vat_order,
    AlarmThreshold, FeatureMatrix, SomConfig, SomModel,
};
use csf_core::{fit_simplified_csf, CsfConfig, Signal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub faults: FaultFrequencies,
    pub band_fraction: f64,
    pub blehnr_mode: BlehnrMode,
}

impl FeatureConfig {
    pub fn new(faults: FaultFrequencies) -> Self {
        Self { faults, band_fraction: csf_core::features::DEFAULT_BAND_FRACTION, blehnr_mode: BlehnrMode::AcfPeak }
    }

    pub fn extract(&self, signal: &Signal) -> Result<FeatureVector> {
        Ok(extract_feature_vector_with_mode(signal, &self.faults, self.band_fraction, self.blehnr_mode)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchFeatures {
    pub raw: Vec<FeatureVector>,
    pub filtered: Vec<FeatureVector>,
}

impl BranchFeatures {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

pub fn csf_filtered(signal: &Signal, csf: &CsfConfig) -> Result<Signal> {
    let fit = fit_simplified_csf(signal, csf)?;
    Ok(fit.filtered_signal(signal.sample_rate_hz())?)
}

/// Features of every signal before and after filtering. Signals are
/// processed in parallel; output order follows input order.
pub fn extract_branches(signals: &[Signal], features: &FeatureConfig, csf: &CsfConfig) -> Result<BranchFeatures> {
    let pairs: Vec<(FeatureVector, FeatureVector)> = signals
        .par_iter()
        .map(|s| Ok((features.extract(s)?, features.extract(&csf_filtered(s, csf)?)?)))
        .collect::<Result<_>>()?;
    let (raw, filtered) = pairs.into_iter().unzip();
    Ok(BranchFeatures { raw, filtered })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessConfig {
    pub som: SomConfig,
    /// Leading snapshots used as the healthy baseline.
    pub n_train: usize,
    pub k_sigma: f64,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self { som: SomConfig::default(), n_train: 20, k_sigma: 6.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchAssessment {
    pub mqe: Vec<f64>,
    /// Held-out MQE of each training snapshot; the alarm statistics.
    pub training_mqe: Vec<f64>,
    pub threshold: AlarmThreshold,
    pub threshold_value: f64,
    /// First snapshot after the training window above the threshold.
    pub alarm_index: Option<usize>,
    pub warnings: Vec<String>,
    pub model: SomModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessReport {
    pub config: AssessConfig,
    pub n_snapshots: usize,
    pub raw: BranchAssessment,
    pub filtered: BranchAssessment,
}

/// SOM-MQE health assessment of one feature sequence.
///
/// The map is fitted on the first `n_train` rows. Each training row's MQE
/// for the alarm statistics comes from a map fitted without that row.
pub fn assess_branch(features: &[FeatureVector], config: &AssessConfig) -> Result<BranchAssessment> {
    if features.len() <= config.n_train {
        return Err(Error::Invalid(format!(
            "assessment needs at least {} snapshots, got {}",
            config.n_train + 1,
            features.len()
        )));
    }
    let matrix = FeatureMatrix::from_features(features);
    let train = matrix.slice_rows(0..config.n_train);
    let model = SomModel::fit(&train, &config.som)?;
    let mqe = model.mqe_all(&matrix)?;
    let training_mqe = leave_one_out_mqe(&train, &config.som)?;
    let threshold = AlarmThreshold::from_training(&training_mqe, config.k_sigma)?;
    let alarm = alarm_index(&mqe, threshold.value(), config.n_train);
    Ok(BranchAssessment {
        mqe,
        training_mqe,
        threshold,
        threshold_value: threshold.value(),
        alarm_index: alarm,
        warnings: model.warnings().to_vec(),
        model,
    })
}

pub fn assess(features: &BranchFeatures, config: &AssessConfig) -> Result<AssessReport> {
    Ok(AssessReport {
        config: config.clone(),
        n_snapshots: features.len(),
        raw: assess_branch(&features.raw, config)?,
        filtered: assess_branch(&features.filtered, config)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub n_components: usize,
    /// Defaults to the number of distinct ground-truth labels.
    pub n_clusters: Option<usize>,
    pub n_restarts: usize,
    pub seed: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { n_components: 3, n_clusters: None, n_restarts: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchClassification {
    pub explained_variance_ratio: Vec<f64>,
    pub scores: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub purity: f64,
    pub vat_order: Vec<usize>,
    pub vat_matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub config: ClassifyConfig,
    pub truth: Vec<usize>,
    pub raw: BranchClassification,
    pub filtered: BranchClassification,
}

/// PCA scores, k-means clusters and VAT ordering of one feature set. VAT
/// uses Euclidean distances between the same PCA scores.
pub fn classify_branch(features: &[FeatureVector], truth: &[usize], config: &ClassifyConfig) -> Result<BranchClassification> {
    if features.len() != truth.len() {
        return Err(Error::Invalid(format!("{} feature rows but {} labels", features.len(), truth.len())));
    }
    let mut classes = truth.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Invalid("classification needs at least two classes".into()));
    }
    let rows: Vec<Vec<f64>> = features.iter().map(FeatureVector::to_vec).collect();
    let constant = (0..5).all(|j| rows.iter().all(|r| r[j] == rows[0][j]));
    if constant {
        return Err(Error::Core(csf_core::Error::DegenerateInput("all feature rows are identical".into())));
    }
    let (pca, scores) = pca_fit_transform(&rows, config.n_components)?;
    let k = config.n_clusters.unwrap_or(classes.len());
    let clusters = kmeans(&scores, k, config.n_restarts, config.seed)?;
    let vat = vat_order(&euclidean_distances(&scores))?;
    Ok(BranchClassification {
        explained_variance_ratio: pca.explained_variance_ratio,
        purity: purity(&clusters.labels, truth)?,
        scores,
        labels: clusters.labels,
        inertia: clusters.inertia,
        vat_order: vat.order,
        vat_matrix: vat.reordered,
    })
}

pub fn classify(features: &BranchFeatures, truth: &[usize], config: &ClassifyConfig) -> Result<ClassifyReport> {
    Ok(ClassifyReport {
        config: config.clone(),
        truth: truth.to_vec(),
        raw: classify_branch(&features.raw, truth, config)?,
        filtered: classify_branch(&features.filtered, truth, config)?,
    })
}

/// True when every label occupies one contiguous run of `order`.
pub fn labels_contiguous(order: &[usize], truth: &[usize]) -> bool {
    let mut seen = Vec::new();
    let mut previous = None;
    for &i in order {
        let label = truth[i];
        if previous != Some(label) {
            if seen.contains(&label) {
                return false;
            }
            seen.push(label);
            previous = Some(label);
        }
    }
    true
}
