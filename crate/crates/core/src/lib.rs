//! Calibrated confidence for cosine-similarity verification.
//!
//! A verification model accepts a pair when its similarity `s` reaches a
//! threshold `tau`. [`measure`] turns that decision into a confidence in
//! `[0.5, 1]`; [`asc`] fits an angular affine remapping that makes those
//! confidences match observed accuracy without changing any decision;
//! [`baselines`] provides histogram-binning and isotonic alternatives;
//! [`metrics`] measures the result.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the file loaders and the CLI
//! use.

pub mod asc;
pub mod baselines;
pub mod calibrator;
pub mod data;
pub mod error;
pub mod measure;
pub mod metrics;
pub mod scalar;

pub use calibrator::{fit_calibrator, Calibrator, CalibratorConfig, CalibratorKind};
pub use error::{CalibError, Result};
pub use measure::{confidence, cosine_similarity, phi, predict, Label};
pub use metrics::BinScheme;
pub use scalar::Scalar;

pub type PairRecord = measure::PairRecord<f64>;
pub type Threshold = measure::Threshold<f64>;
pub type Prediction = measure::Prediction<f64>;
pub type Dataset = measure::Dataset<f64>;
pub type AscParams = asc::AscParams<f64>;
pub type FitReport = asc::FitReport<f64>;
pub type HistogramModel = baselines::HistogramModel<f64>;
pub type IsotonicModel = baselines::IsotonicModel<f64>;
pub type CalibratorModel = calibrator::CalibratorModel<f64>;
pub type BinReport = metrics::BinReport<f64>;
pub type EceReport = metrics::EceReport<f64>;
pub type RocPoint = metrics::RocPoint<f64>;
pub type OperatingPoint = metrics::OperatingPoint<f64>;

pub type PairRecordF32 = measure::PairRecord<f32>;
pub type ThresholdF32 = measure::Threshold<f32>;
pub type DatasetF32 = measure::Dataset<f32>;
pub type AscParamsF32 = asc::AscParams<f32>;
