//! Report documents written by the CLI.

use ascal::metrics::{self, BinScheme};
use ascal::{Dataset, EceReport, Threshold};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub tar: f64,
    pub far: f64,
    pub auc: f64,
}

/// Metrics of one set of scores against one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tau: f64,
    pub accuracy: f64,
    pub mean_confidence: f64,
    pub ece: EceReport,
    /// Present when both classes occur in the data.
    pub verification: Option<Verification>,
}

impl Summary {
    pub fn compute(dataset: &Dataset, tau: Threshold, bins: usize, scheme: BinScheme) -> CliResult<Self> {
        let verification = if dataset.require_both_classes().is_ok() {
            let (tar, far) = metrics::rates_at(dataset, tau)?;
            Some(Verification {
                tar,
                far,
                auc: metrics::auc(dataset)?,
            })
        } else {
            None
        };
        Ok(Summary {
            tau: tau.value(),
            accuracy: metrics::accuracy(dataset, tau)?,
            mean_confidence: metrics::mean_confidence(dataset, tau)?,
            ece: metrics::ece(dataset, tau, bins, scheme)?,
            verification,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub calibrator: String,
    pub n: usize,
    pub tau_source: String,
    pub before: Summary,
    pub after: Summary,
    pub fit: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub positives: usize,
    pub negatives: usize,
    /// `"none"` when no model was given.
    pub calibrator: String,
    pub uncalibrated: Summary,
    pub calibrated: Option<Summary>,
}

/// Scalar metrics of one fold before and after calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    pub mean_confidence_before: f64,
    pub mean_confidence_after: f64,
    pub ece_before: f64,
    pub ece_after: f64,
}

impl FoldMetrics {
    pub fn mean(rows: &[FoldMetrics]) -> FoldMetrics {
        let n = rows.len() as f64;
        let avg = |f: fn(&FoldMetrics) -> f64| rows.iter().map(f).sum::<f64>() / n;
        FoldMetrics {
            accuracy_before: avg(|r| r.accuracy_before),
            accuracy_after: avg(|r| r.accuracy_after),
            mean_confidence_before: avg(|r| r.mean_confidence_before),
            mean_confidence_after: avg(|r| r.mean_confidence_after),
            ece_before: avg(|r| r.ece_before),
            ece_after: avg(|r| r.ece_after),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub tau: f64,
    pub tau_calibrated: f64,
    #[serde(flatten)]
    pub metrics: FoldMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfoldReport {
    pub calibrator: String,
    pub k: usize,
    /// `"stratified"` or `"input"` (fold ids supplied with the data).
    pub folds_source: String,
    pub seed: Option<u64>,
    pub scheme: BinScheme,
    pub m_bins: usize,
    pub folds: Vec<FoldRow>,
    pub mean: FoldMetrics,
}
