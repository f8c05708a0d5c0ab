//! Dataset ingestion, synthetic data, fold splitting and model persistence.

mod folds;
mod io;
mod model;
mod synth;

use std::io::Write;
use std::path::Path;

pub use folds::{stratified_folds, FoldSplit};
pub use io::{
    load_dataset, load_embeddings, load_pairs, read_embeddings, read_pairs, write_pairs, InputFormat,
};
pub use model::{load_model, model_from_str, model_to_string, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use synth::{generate, SyntheticSpec};

use crate::error::Result;

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so a failed write never leaves a partial file behind.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
