use serde::{Deserialize, Serialize};

use super::ModelError;

/// How a token's incoming DAG states are merged into one input state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineVariant {
    /// Score each transformed incoming state and take the softmax-weighted
    /// sum.
    Attention,
    /// Unweighted mean of the transformed incoming states.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Recurrence over the dependency DAGs.
    DagGru,
    /// Sequential baseline; ignores dependency structure entirely.
    PlainBigru,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Hidden state width per direction.
    pub hidden: usize,
    /// Width of the learned edge-type vectors in the shared combine.
    pub edge_dim: usize,
    pub combine: CombineVariant,
    /// Use one transform matrix per edge type instead of the shared
    /// transform plus edge vectors.
    pub per_edge_weights: bool,
    /// Inverted-dropout rate applied to the token representation before
    /// the classifier (training passes only).
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::DagGru,
            hidden: 128,
            edge_dim: 32,
            combine: CombineVariant::Attention,
            per_edge_weights: false,
            dropout: 0.5,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.hidden == 0 {
            return Err(ModelError::BadConfig("hidden must be at least 1".into()));
        }
        if self.kind == ModelKind::DagGru && !self.per_edge_weights && self.edge_dim == 0 {
            return Err(ModelError::BadConfig(
                "edge_dim must be at least 1 for the shared combine".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ModelError::BadConfig(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Width of the per-token representation fed to the classifier.
    pub fn representation_width(&self) -> usize {
        match self.kind {
            ModelKind::DagGru => 2 * self.hidden,
            // Token states plus the sentence-final state of each direction.
            ModelKind::PlainBigru => 4 * self.hidden,
        }
    }

    /// Short name used in run ledgers and result tables.
    pub fn table_name(&self) -> &'static str {
        match (self.kind, self.combine) {
            (ModelKind::PlainBigru, _) => "bigru",
            (ModelKind::DagGru, CombineVariant::Attention) => "dag-gru-attn",
            (ModelKind::DagGru, CombineVariant::Average) => "dag-gru-avg",
        }
    }
}
