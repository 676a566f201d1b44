//! Model persistence: a single JSON file carrying the config, the
//! vocabularies the model was trained against, and every parameter tensor.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::forward::Model;
use super::params::ModelParams;
use super::ModelError;
use crate::corpus::LabelVocab;
use crate::graph::EdgeVocab;

/// Bumped on any incompatible change to the checkpoint layout.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    config: ModelConfig,
    embedding_dim: usize,
    edge_types: Vec<String>,
    labels: Vec<String>,
    params: ModelParams,
}

fn io_err(path: &Path, source: std::io::Error) -> ModelError {
    ModelError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Serialize a model to pretty-printed JSON. Field order is fixed by the
/// struct declarations, so identical models produce identical bytes.
pub fn save_model(model: &Model, path: &Path) -> Result<(), ModelError> {
    let file = CheckpointFile {
        format_version: CHECKPOINT_VERSION,
        config: model.config.clone(),
        embedding_dim: model.embedding_dim,
        edge_types: model.edge_vocab.names(),
        labels: model.labels.names().to_vec(),
        params: model.params.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| ModelError::Checkpoint(format!("serialize: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Load and fully validate a checkpoint: version, vocabulary structure,
/// and every parameter shape.
pub fn load_model(path: &Path) -> Result<Model, ModelError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: CheckpointFile = serde_json::from_str(&text)
        .map_err(|e| ModelError::Checkpoint(format!("parse {}: {e}", path.display())))?;
    if file.format_version != CHECKPOINT_VERSION {
        return Err(ModelError::Checkpoint(format!(
            "format version {} (this build reads {CHECKPOINT_VERSION})",
            file.format_version
        )));
    }
    let edge_vocab = EdgeVocab::from_names(&file.edge_types).ok_or_else(|| {
        ModelError::Checkpoint("edge type inventory is not a valid vocabulary".into())
    })?;
    let labels = LabelVocab::from_names(&file.labels).ok_or_else(|| {
        ModelError::Checkpoint("label inventory must start with NIL and be duplicate-free".into())
    })?;
    Model::from_parts(file.config, file.embedding_dim, edge_vocab, labels, file.params)
}
