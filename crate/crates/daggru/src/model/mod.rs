//! The trigger-detection models: a bidirectional GRU whose recurrence runs
//! over per-sentence dependency DAGs (incoming states merged by an
//! attention or averaging combine), and a plain sequential BiGRU baseline.

mod checkpoint;
mod config;
mod forward;
mod params;

pub use checkpoint::{load_model, save_model, CHECKPOINT_VERSION};
pub use config::{CombineVariant, ModelConfig, ModelKind};
pub use forward::{
    combine, combine_with_weights, gru_cell, ordered_grads, register_params, AttnVars,
    CombineVars, ForwardPass, GruVars, Model, ParamVars, PassMode, SentenceLoss,
};
pub use params::{
    init_params, validate_params, AttentionWeights, CombineWeights, GruWeights, ModelParams,
};

use crate::numeric::NumericError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("invalid model configuration: {0}")]
    BadConfig(String),
    #[error("corpus has no embeddings attached (embedding_dim = 0)")]
    Unembedded,
    #[error("combine called with no incoming edges; direction-initial tokens use a synthetic temporal edge instead")]
    EmptyCombine,
    #[error("gold label id {id} out of range for {n_labels} labels")]
    LabelOutOfRange { id: usize, n_labels: usize },
    #[error("token embedding width {got} does not match model width {expected}")]
    EmbeddingWidth { expected: usize, got: usize },
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
