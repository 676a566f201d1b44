use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{Corpus, DependencyEdge, Document, LabelVocab, Sentence, Token};
use super::CorpusError;

/// One corpus document per line, serde-shaped to the wire format:
/// `{"id", "domain", "sentences": [{"tokens": [{"surface", "label",
/// "emb"?}], "deps": [[head, dependent, "label"], ...]}]}`.
#[derive(Debug, Serialize, Deserialize)]
struct RawDoc {
    id: String,
    domain: String,
    sentences: Vec<RawSentence>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSentence {
    tokens: Vec<RawToken>,
    #[serde(default)]
    deps: Vec<(usize, usize, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawToken {
    surface: String,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    emb: Option<Vec<f64>>,
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Load a JSONL corpus. Tokens may carry inline `emb` vectors (all of them
/// or none of them); without vectors the corpus is "unembedded" until an
/// embedding table is attached.
pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);

    let mut raws: Vec<RawDoc> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDoc =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                path: path.display().to_string(),
                line: lineno + 1,
                detail: e.to_string(),
            })?;
        raws.push(raw);
    }

    let labels = LabelVocab::from_observed(
        raws.iter()
            .flat_map(|d| &d.sentences)
            .flat_map(|s| &s.tokens)
            .map(|t| t.label.as_str()),
    );

    // Embedding width comes from the first embedded token; every token must
    // then agree (enforced by Corpus::new), and en route we reject a mix of
    // embedded and unembedded tokens explicitly for a clearer message.
    let k = raws
        .iter()
        .flat_map(|d| &d.sentences)
        .flat_map(|s| &s.tokens)
        .find_map(|t| t.emb.as_ref().map(|e| e.len()))
        .unwrap_or(0);

    let mut docs = Vec::with_capacity(raws.len());
    for raw in raws {
        let mut sentences = Vec::with_capacity(raw.sentences.len());
        for (si, rs) in raw.sentences.into_iter().enumerate() {
            let mut tokens = Vec::with_capacity(rs.tokens.len());
            for (ti, rt) in rs.tokens.into_iter().enumerate() {
                let gold_label =
                    labels.id_of(&rt.label).expect("vocab built from these labels");
                let embedding = match rt.emb {
                    Some(e) => e,
                    None if k == 0 => vec![],
                    None => {
                        return Err(CorpusError::BadSentence {
                            doc: raw.id.clone(),
                            sentence: si,
                            detail: format!(
                                "token {ti} has no emb but other tokens do"
                            ),
                        })
                    }
                };
                tokens.push(Token {
                    surface: rt.surface,
                    embedding,
                    gold_label,
                });
            }
            let deps = rs
                .deps
                .into_iter()
                .map(|(head, dependent, label)| DependencyEdge {
                    head,
                    dependent,
                    label,
                })
                .collect();
            sentences.push(Sentence { tokens, deps });
        }
        docs.push(Document {
            id: raw.id,
            domain: raw.domain,
            sentences,
        });
    }
    Corpus::new(docs, labels, k)
}

/// Write a corpus back to JSONL. Embeddings are emitted whenever the corpus
/// carries them, so save -> load round-trips structurally.
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let embedded = corpus.embedding_dim() > 0;
    for doc in &corpus.docs {
        let raw = RawDoc {
            id: doc.id.clone(),
            domain: doc.domain.clone(),
            sentences: doc
                .sentences
                .iter()
                .map(|s| RawSentence {
                    tokens: s
                        .tokens
                        .iter()
                        .map(|t| RawToken {
                            surface: t.surface.clone(),
                            label: corpus
                                .labels
                                .name_of(t.gold_label)
                                .expect("validated")
                                .to_string(),
                            emb: embedded.then(|| t.embedding.clone()),
                        })
                        .collect(),
                    deps: s
                        .deps
                        .iter()
                        .map(|d| (d.head, d.dependent, d.label.clone()))
                        .collect(),
                })
                .collect(),
        };
        let line = serde_json::to_string(&raw).expect("serializable");
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
