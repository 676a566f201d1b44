//! The training loop: shuffled mini-batches, per-token mean cross-entropy,
//! Adam updates on a halving learning-rate schedule, dev-F1 early stopping
//! with best-parameter restore, and a single final test evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::TrainError;
use crate::corpus::{Corpus, CorpusError, CorpusSplit, Document, LabelVocab, Sentence};
use crate::graph::EdgeVocab;
use crate::model::{ordered_grads, Model, ModelConfig, PassMode};
use crate::stats::micro_f1;
use crate::Tape;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

// Distinct deterministic streams derived from the one run seed.
const SHUFFLE_SALT: u64 = 0x5348_5546_464c_4531;
const DROPOUT_SALT: u64 = 0x4452_4f50_4f55_5431;

/// Optimization hyperparameters. `lr0` may be 0 to freeze the parameters
/// (useful for schedule and early-stopping checks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr0: f64,
    /// The learning rate halves every this many epochs.
    pub halve_every: usize,
    pub max_epochs: usize,
    pub l2: f64,
    /// Stop after this many consecutive epochs without a strict dev-F1
    /// improvement.
    pub patience: usize,
    /// Mini-batch size in sentences.
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr0: 5e-4,
            halve_every: 5,
            max_epochs: 30,
            l2: 1e-4,
            patience: 5,
            batch_size: 8,
            seed: 1,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::BadConfig(msg));
        if !self.lr0.is_finite() || self.lr0 < 0.0 {
            return bad(format!("lr0 must be finite and >= 0, got {}", self.lr0));
        }
        if !self.l2.is_finite() || self.l2 < 0.0 {
            return bad(format!("l2 must be finite and >= 0, got {}", self.l2));
        }
        if self.halve_every == 0 {
            return bad("halve_every must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.patience == 0 {
            return bad("patience must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        Ok(())
    }

    /// Learning rate for a 1-based epoch: lr0 halved every `halve_every`
    /// epochs.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        debug_assert!(epoch >= 1);
        self.lr0 * 0.5f64.powi(((epoch - 1) / self.halve_every) as i32)
    }
}

/// One epoch's ledger entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    pub lr: f64,
    /// Mean cross-entropy per token over the epoch, sampled dropout masks
    /// included.
    pub train_loss: f64,
    pub dev_f1: f64,
}

/// Everything a run leaves behind, minus the parameters (those go in the
/// checkpoint file named by `checkpoint`). One JSON object per line in the
/// run ledger. Deliberately free of timestamps and paths that vary across
/// identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub seed: u64,
    pub split_id: String,
    pub best_epoch: usize,
    pub dev_f1: f64,
    pub test_f1: f64,
    /// How many times the test partition was scored; always 1.
    pub test_evaluations: usize,
    pub epochs: Vec<EpochTrace>,
    pub checkpoint: Option<String>,
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub record: RunRecord,
}

/// Micro-F1 of a model over the listed documents, scored in the corpus's
/// label space so gold labels unseen at training time still count against
/// recall.
pub fn eval_f1(model: &Model, corpus: &Corpus, doc_ids: &[String]) -> Result<f64, TrainError> {
    let mut pairs = Vec::new();
    for id in doc_ids {
        let doc = corpus
            .doc(id)
            .ok_or_else(|| CorpusError::UnknownDoc { id: id.clone() })?;
        for sentence in &doc.sentences {
            let preds = model.predict(sentence)?;
            for (tok, pred) in sentence.tokens.iter().zip(preds) {
                let name = model.labels.name_of(pred).expect("prediction in model vocab");
                let pred_corpus = corpus.labels.id_of(name).ok_or_else(|| {
                    TrainError::BadConfig(format!("model label {name} unknown to the corpus"))
                })?;
                pairs.push((tok.gold_label, pred_corpus));
            }
        }
    }
    Ok(micro_f1(&pairs))
}

fn gather_docs<'c>(
    corpus: &'c Corpus,
    ids: &[String],
    part: &'static str,
) -> Result<Vec<&'c Document>, TrainError> {
    if ids.is_empty() {
        return Err(TrainError::EmptySplit(part));
    }
    ids.iter()
        .map(|id| {
            corpus
                .doc(id)
                .ok_or_else(|| CorpusError::UnknownDoc { id: id.clone() }.into())
        })
        .collect()
}

/// Train one model on one split. The label and edge-type inventories come
/// from the training partition alone; dev steers early stopping; the test
/// partition is scored exactly once, after the best parameters have been
/// restored.
pub fn train_run(
    corpus: &Corpus,
    split: &CorpusSplit,
    split_id: &str,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    model_config.validate()?;
    train_config.validate()?;
    let train_docs = gather_docs(corpus, &split.train, "train")?;
    gather_docs(corpus, &split.dev, "dev")?;
    gather_docs(corpus, &split.test, "test")?;

    let edge_vocab = EdgeVocab::from_docs(train_docs.iter().copied());
    let labels = LabelVocab::from_observed(
        train_docs
            .iter()
            .flat_map(|d| &d.sentences)
            .flat_map(|s| &s.tokens)
            .map(|t| corpus.labels.name_of(t.gold_label).expect("validated corpus")),
    );
    let mut model = Model::new(
        model_config.clone(),
        corpus.embedding_dim(),
        edge_vocab,
        labels,
        train_config.seed,
    )?;

    // Training sentences with gold labels mapped into the model's space.
    let train_set: Vec<(&Sentence, Vec<usize>)> = train_docs
        .iter()
        .flat_map(|d| &d.sentences)
        .map(|s| {
            let golds = s
                .tokens
                .iter()
                .map(|t| {
                    let name = corpus.labels.name_of(t.gold_label).expect("validated corpus");
                    model.labels.id_of(name).expect("trained label inventory")
                })
                .collect();
            (s, golds)
        })
        .collect();

    let mut shuffle_rng = ChaCha12Rng::seed_from_u64(train_config.seed ^ SHUFFLE_SALT);
    let mut dropout_rng = ChaCha12Rng::seed_from_u64(train_config.seed ^ DROPOUT_SALT);
    let mut adam = AdamState::new(&model.params);

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epochs = Vec::new();
    let mut best_dev = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params = model.params.clone();
    let mut stale = 0usize;

    for epoch in 1..=train_config.max_epochs {
        let lr = train_config.lr_at(epoch);
        order.shuffle(&mut shuffle_rng);

        let mut epoch_ce = 0.0;
        let mut epoch_tokens = 0usize;
        for batch in order.chunks(train_config.batch_size) {
            let batch_tokens: usize = batch.iter().map(|&i| train_set[i].0.tokens.len()).sum();
            let mut accum = model.params.zeros_like();
            for &i in batch {
                let (sentence, golds) = &train_set[i];
                let mut tape = Tape::new();
                let sl = model.sentence_loss(
                    &mut tape,
                    sentence,
                    golds,
                    PassMode::Train { rng: &mut dropout_rng },
                )?;
                let loss = tape.value(sl.loss).data()[0];
                if !loss.is_finite() {
                    return Err(TrainError::Diverged { seed: train_config.seed, epoch });
                }
                epoch_ce += loss;
                let grads = tape.backward(sl.loss).map_err(crate::model::ModelError::from)?;
                for (acc, g) in accum.iter_mut().zip(ordered_grads(&sl.params, &grads)) {
                    acc.add_assign(&g).map_err(crate::model::ModelError::from)?;
                }
            }
            for acc in &mut accum {
                acc.scale_in_place(1.0 / batch_tokens as f64);
            }
            adam_step(
                &mut model.params,
                &accum,
                &mut adam,
                lr,
                train_config.l2,
                train_config.beta1,
                train_config.beta2,
                train_config.eps,
            )?;
            epoch_tokens += batch_tokens;
        }

        let dev_f1 = eval_f1(&model, corpus, &split.dev)?;
        epochs.push(EpochTrace {
            epoch,
            lr,
            train_loss: epoch_ce / epoch_tokens as f64,
            dev_f1,
        });

        // Strict improvement keeps the earliest best epoch on ties.
        if dev_f1 > best_dev {
            best_dev = dev_f1;
            best_epoch = epoch;
            best_params = model.params.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= train_config.patience {
                break;
            }
        }
    }

    model.params = best_params;
    let test_f1 = eval_f1(&model, corpus, &split.test)?;

    let record = RunRecord {
        model: model_config.table_name().to_string(),
        seed: train_config.seed,
        split_id: split_id.to_string(),
        best_epoch,
        dev_f1: best_dev,
        test_f1,
        test_evaluations: 1,
        epochs,
        checkpoint: None,
    };
    Ok(TrainOutcome { model, record })
}
