//! Calibrator model files.
//!
//! A model file is a JSON document:
//!
//! ```text
//! {
//!   "format": "ascal-calibrator",
//!   "version": 1,
//!   "kind": "asc" | "histogram" | "isotonic",
//!   "params": { ... }
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so reloading reproduces
//! every parameter bit for bit.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::calibrator::{CalibratorKind, CalibratorModel};
use crate::error::{CalibError, Result};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "ascal-calibrator";
pub const MODEL_VERSION: u64 = 1;

fn json_err(e: serde_json::Error) -> CalibError {
    CalibError::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    }
}

pub fn model_to_string<T>(model: &CalibratorModel<T>) -> Result<String>
where
    T: Scalar + Serialize,
{
    let params = match model {
        CalibratorModel::Asc(p) => serde_json::to_value(p),
        CalibratorModel::Histogram(m) => serde_json::to_value(m),
        CalibratorModel::Isotonic(m) => serde_json::to_value(m),
    }
    .map_err(json_err)?;
    let doc = json!({
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind().as_str(),
        "params": params,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(json_err)?;
    text.push('\n');
    Ok(text)
}

pub fn model_from_str<T>(text: &str) -> Result<CalibratorModel<T>>
where
    T: Scalar + DeserializeOwned,
{
    let doc: Value = serde_json::from_str(text).map_err(json_err)?;
    let field = |name: &str| doc.get(name);
    match field("format").and_then(Value::as_str) {
        Some(MODEL_FORMAT) => {}
        other => {
            return Err(CalibError::VersionMismatch(format!(
                "format tag {other:?}, expected {MODEL_FORMAT:?}"
            )))
        }
    }
    match field("version").and_then(Value::as_u64) {
        Some(MODEL_VERSION) => {}
        other => {
            return Err(CalibError::VersionMismatch(format!(
                "version {other:?}, expected {MODEL_VERSION}"
            )))
        }
    }
    let kind: CalibratorKind = field("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CalibError::VersionMismatch("missing calibrator kind".into()))?
        .parse()
        .map_err(|e: CalibError| CalibError::VersionMismatch(e.to_string()))?;
    let params = field("params")
        .cloned()
        .ok_or_else(|| CalibError::InvalidModel("missing params".into()))?;
    let invalid = |e: serde_json::Error| CalibError::InvalidModel(e.to_string());
    Ok(match kind {
        CalibratorKind::Asc => CalibratorModel::Asc(serde_json::from_value(params).map_err(invalid)?),
        CalibratorKind::Histogram => {
            CalibratorModel::Histogram(serde_json::from_value(params).map_err(invalid)?)
        }
        CalibratorKind::Isotonic => {
            CalibratorModel::Isotonic(serde_json::from_value(params).map_err(invalid)?)
        }
    })
}

pub fn save_model<T>(model: &CalibratorModel<T>, path: &Path) -> Result<()>
where
    T: Scalar + Serialize,
{
    super::write_atomically(path, model_to_string(model)?.as_bytes())
}

pub fn load_model<T>(path: &Path) -> Result<CalibratorModel<T>>
where
    T: Scalar + DeserializeOwned,
{
    model_from_str(&std::fs::read_to_string(path)?)
}
