//! Documents, sentences, tokens, and everything that feeds them: JSONL
//! corpus IO, TSV word-embedding tables, the synthetic corpus generator,
//! and train/dev/test split construction.

mod embeddings;
mod io;
mod split;
mod synthetic;
mod types;

pub use embeddings::{attach_embeddings, load_embeddings, AttachReport, EmbeddingTable, UNKNOWN_SURFACE};
pub use io::{load_corpus, save_corpus};
pub use split::{load_manifest, random_split, save_manifest, standard_split, CorpusSplit, SplitManifest};
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use types::{
    Corpus, DependencyEdge, Document, LabelId, LabelVocab, Sentence, Token, NIL_ID, NIL_LABEL,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {detail}")]
    Malformed {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("document {doc}, sentence {sentence}: {detail}")]
    BadSentence {
        doc: String,
        sentence: usize,
        detail: String,
    },
    #[error("duplicate document id {id}")]
    DuplicateDoc { id: String },
    #[error("unknown document id {id} in split")]
    UnknownDoc { id: String },
    #[error("document id {id} appears in more than one split partition")]
    OverlappingSplit { id: String },
    #[error("split wants {wanted} documents but corpus has {available}")]
    SplitTooLarge { wanted: usize, available: usize },
    #[error("no embedding for word {word:?} and the table has no {unknown:?} fallback row")]
    MissingEmbedding { word: String, unknown: String },
    #[error("embedding dimension mismatch: expected {expected}, {context} has {got}")]
    EmbeddingDim {
        expected: usize,
        got: usize,
        context: String,
    },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}
