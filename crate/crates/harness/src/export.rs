//! Model persistence as JSON.

use std::path::Path;

use rekanren_core::ReactiveSystem;

use crate::json::{json_to_term, term_to_json, JsonError};

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("model is not ground: {0}")]
    NotGround(#[from] rekanren_core::subst::ReifyError),
    #[error(transparent)]
    Json(#[from] JsonError),
}

/// Pretty JSON text of the current model, newline-terminated.
pub fn model_json(sys: &ReactiveSystem) -> Result<String, ExportError> {
    let v = term_to_json(&sys.model()?)?;
    Ok(serde_json::to_string_pretty(&v).expect("json prints") + "\n")
}

pub fn export_model(sys: &ReactiveSystem, path: &Path) -> Result<(), ExportError> {
    let text = model_json(sys)?;
    std::fs::write(path, text).map_err(|source| ExportError::Io { path: path.display().to_string(), source })
}

pub fn import_model(path: &Path) -> Result<ReactiveSystem, ExportError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ExportError::Io { path: p.clone(), source })?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|source| ExportError::Parse { path: p, source })?;
    Ok(ReactiveSystem::new(&json_to_term(&v))?)
}
