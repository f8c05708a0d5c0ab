//! A fitted calibrator of any family behind one interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asc::{self, AscParams, FitConfig, FitReport};
use crate::baselines::{self, HistogramModel, IsotonicModel};
use crate::error::{CalibError, Result};
use crate::measure::{Dataset, Prediction, Threshold};
use crate::scalar::Scalar;

/// Maps raw similarities (and the threshold) to calibrated ones.
pub trait Calibrator<T: Scalar> {
    fn calibrate(&self, s: T) -> T;

    fn tau_raw(&self) -> Threshold<T>;

    fn tau_calibrated(&self) -> Threshold<T>;

    fn predict(&self, s: T) -> Prediction<T> {
        Prediction::new(self.calibrate(s), self.tau_calibrated())
    }

    fn calibrate_dataset(&self, dataset: &Dataset<T>) -> Dataset<T> {
        dataset.map_similarities(|s| self.calibrate(s))
    }
}

impl<T: Scalar> Calibrator<T> for AscParams<T> {
    fn calibrate(&self, s: T) -> T {
        self.apply(s)
    }

    fn tau_raw(&self) -> Threshold<T> {
        AscParams::tau_raw(self)
    }

    fn tau_calibrated(&self) -> Threshold<T> {
        AscParams::tau_calibrated(self)
    }
}

impl<T: Scalar> Calibrator<T> for HistogramModel<T> {
    fn calibrate(&self, s: T) -> T {
        self.apply(s)
    }

    fn tau_raw(&self) -> Threshold<T> {
        HistogramModel::tau_raw(self)
    }

    fn tau_calibrated(&self) -> Threshold<T> {
        HistogramModel::tau_calibrated(self)
    }
}

impl<T: Scalar> Calibrator<T> for IsotonicModel<T> {
    fn calibrate(&self, s: T) -> T {
        self.apply(s)
    }

    fn tau_raw(&self) -> Threshold<T> {
        IsotonicModel::tau_raw(self)
    }

    fn tau_calibrated(&self) -> Threshold<T> {
        IsotonicModel::tau_calibrated(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibratorKind {
    Asc,
    Histogram,
    Isotonic,
}

impl CalibratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CalibratorKind::Asc => "asc",
            CalibratorKind::Histogram => "histogram",
            CalibratorKind::Isotonic => "isotonic",
        }
    }
}

impl fmt::Display for CalibratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CalibratorKind {
    type Err = CalibError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asc" => Ok(CalibratorKind::Asc),
            "histogram" => Ok(CalibratorKind::Histogram),
            "isotonic" => Ok(CalibratorKind::Isotonic),
            other => Err(CalibError::InvalidArgument(format!(
                "unknown calibrator kind {other:?}"
            ))),
        }
    }
}

/// Fitted calibrator of one of the three families.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibratorModel<T: Scalar> {
    Asc(AscParams<T>),
    Histogram(HistogramModel<T>),
    Isotonic(IsotonicModel<T>),
}

impl<T: Scalar> CalibratorModel<T> {
    pub fn kind(&self) -> CalibratorKind {
        match self {
            CalibratorModel::Asc(_) => CalibratorKind::Asc,
            CalibratorModel::Histogram(_) => CalibratorKind::Histogram,
            CalibratorModel::Isotonic(_) => CalibratorKind::Isotonic,
        }
    }

    fn inner(&self) -> &dyn Calibrator<T> {
        match self {
            CalibratorModel::Asc(m) => m,
            CalibratorModel::Histogram(m) => m,
            CalibratorModel::Isotonic(m) => m,
        }
    }
}

impl<T: Scalar> Calibrator<T> for CalibratorModel<T> {
    fn calibrate(&self, s: T) -> T {
        self.inner().calibrate(s)
    }

    fn tau_raw(&self) -> Threshold<T> {
        self.inner().tau_raw()
    }

    fn tau_calibrated(&self) -> Threshold<T> {
        self.inner().tau_calibrated()
    }
}

/// Settings shared by [`fit_calibrator`] across families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratorConfig {
    pub kind: CalibratorKind,
    pub asc: FitConfig,
    pub histogram_bins: usize,
}

impl Default for CalibratorConfig {
    fn default() -> Self {
        CalibratorConfig {
            kind: CalibratorKind::Asc,
            asc: FitConfig::default(),
            histogram_bins: baselines::DEFAULT_HISTOGRAM_BINS,
        }
    }
}

/// Fits the configured family. The fit report is only produced for ASC.
pub fn fit_calibrator<T: Scalar>(
    dataset: &Dataset<T>,
    tau: Threshold<T>,
    config: &CalibratorConfig,
) -> Result<(CalibratorModel<T>, Option<FitReport<T>>)> {
    Ok(match config.kind {
        CalibratorKind::Asc => {
            let (p, report) = asc::fit(dataset, tau, &config.asc)?;
            (CalibratorModel::Asc(p), Some(report))
        }
        CalibratorKind::Histogram => (
            CalibratorModel::Histogram(baselines::fit_histogram(
                dataset,
                tau,
                config.histogram_bins,
            )?),
            None,
        ),
        CalibratorKind::Isotonic => (
            CalibratorModel::Isotonic(baselines::fit_isotonic(dataset, tau)?),
            None,
        ),
    })
}
