//! Event-trigger detection with bidirectional gated recurrent units whose
//! state transitions run over syntactic-dependency DAGs, plus the statistical
//! harness needed to evaluate such models honestly: multi-seed studies,
//! randomized document splits, bootstrap model selection, and Welch t-tests.
//!
//! The crate is organized bottom-up:
//!
//! * [`numeric`] — a small reverse-mode autodiff core: dense tensors, an
//!   operation tape with vector-Jacobian products, and a finite-difference
//!   gradient checker. Generic over the scalar type; the rest of the crate
//!   uses the f64 aliases exported below.
//! * [`corpus`] — document/sentence/token types, JSONL corpus IO, TSV word
//!   embeddings, a synthetic corpus generator with dependency-conditioned
//!   triggers, and split construction.
//! * [`graph`] — per-sentence forward/backward DAG construction from
//!   dependency edges plus the edge-type vocabulary.
//! * [`model`] — the DAG-GRU itself (attention or averaging combine), a
//!   plain sequential BiGRU baseline, parameter init, and checkpointing.
//! * [`trainer`] — Adam with coupled L2 regularization, the epoch-halving
//!   learning-rate schedule, early stopping, and run records.
//! * [`stats`] — micro-F1, mean/CI summaries, Welch's t-test, bootstrap
//!   model selection, seed/split studies, and report rendering.
//! * [`cli`] — the `daggru` command-line interface.

pub mod cli;
pub mod corpus;
pub mod graph;
pub mod model;
pub mod numeric;
pub mod stats;
pub mod trainer;

/// Dense tensor at the crate's working precision.
pub type Tensor = numeric::Tensor<f64>;
/// Autodiff tape at the crate's working precision.
pub type Tape = numeric::Tape<f64>;

pub use numeric::{NumericError, Var};
