//! Training: Adam with coupled L2 regularization, a halving learning-rate
//! schedule, dev-F1 early stopping with best-checkpoint restore, and a
//! fully deterministic run ledger.

mod adam;
mod train;

pub use adam::{adam_step, AdamState};
pub use train::{
    eval_f1, train_run, EpochTrace, RunRecord, TrainConfig, TrainOutcome, DEFAULT_BETA1,
    DEFAULT_BETA2, DEFAULT_EPS,
};

use crate::corpus::CorpusError;
use crate::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("invalid training configuration: {0}")]
    BadConfig(String),
    #[error("the {0} partition is empty")]
    EmptySplit(&'static str),
    #[error("training diverged (non-finite loss) at epoch {epoch} with seed {seed}")]
    Diverged { seed: u64, epoch: usize },
}
