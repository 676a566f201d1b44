use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::types::Corpus;
use super::CorpusError;

/// Surface form of the designated unknown-word row in an embedding table.
pub const UNKNOWN_SURFACE: &str = "<unk>";

/// Word-vector table loaded from TSV: `surface<TAB>v1 v2 ... vk` per line.
/// A row whose surface is [`UNKNOWN_SURFACE`] becomes the fallback vector
/// for out-of-table words.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    vectors: HashMap<String, Vec<f64>>,
    dim: usize,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&[f64]> {
        self.vectors.get(surface).map(|v| v.as_slice())
    }

    pub fn has_unknown(&self) -> bool {
        self.vectors.contains_key(UNKNOWN_SURFACE)
    }
}

/// Counts from [`attach_embeddings`]: how many tokens got a real vector and
/// how many fell back to the unknown row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttachReport {
    pub attached: usize,
    pub fallbacks: usize,
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let reader = BufReader::new(file);
    let mut vectors = HashMap::new();
    let mut dim = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |detail: String| CorpusError::Malformed {
            path: path.display().to_string(),
            line: lineno + 1,
            detail,
        };
        let (surface, rest) = line
            .split_once('\t')
            .ok_or_else(|| malformed("missing tab separator".into()))?;
        let values: Vec<f64> = rest
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(format!("bad number: {e}")))?;
        if values.is_empty() || !values.iter().all(|v| v.is_finite()) {
            return Err(malformed("vector must be non-empty and finite".into()));
        }
        if dim == 0 {
            dim = values.len();
        } else if values.len() != dim {
            return Err(CorpusError::EmbeddingDim {
                expected: dim,
                got: values.len(),
                context: format!("row {} ({surface:?})", lineno + 1),
            });
        }
        vectors.insert(surface.to_string(), values);
    }
    if vectors.is_empty() {
        return Err(CorpusError::Malformed {
            path: path.display().to_string(),
            line: 0,
            detail: "embedding table has no rows".into(),
        });
    }
    Ok(EmbeddingTable { vectors, dim })
}

/// Give every token its vector from the table, falling back to the
/// `<unk>` row for out-of-table words. A missing word with no fallback row
/// is an error that names the word.
pub fn attach_embeddings(
    corpus: &mut Corpus,
    table: &EmbeddingTable,
) -> Result<AttachReport, CorpusError> {
    let unk = table.get(UNKNOWN_SURFACE);
    let mut report = AttachReport {
        attached: 0,
        fallbacks: 0,
    };
    for doc in &mut corpus.docs {
        for sent in &mut doc.sentences {
            for tok in &mut sent.tokens {
                match table.get(&tok.surface) {
                    Some(v) => {
                        tok.embedding = v.to_vec();
                        report.attached += 1;
                    }
                    None => match unk {
                        Some(v) => {
                            tok.embedding = v.to_vec();
                            report.fallbacks += 1;
                        }
                        None => {
                            return Err(CorpusError::MissingEmbedding {
                                word: tok.surface.clone(),
                                unknown: UNKNOWN_SURFACE.into(),
                            })
                        }
                    },
                }
            }
        }
    }
    corpus.set_embedding_dim(table.dim());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::types::{Document, LabelVocab, Sentence, Token};
    use std::io::Write as _;

    fn table_from(content: &str) -> EmbeddingTable {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        load_embeddings(f.path()).unwrap()
    }

    fn one_token_corpus(surface: &str) -> Corpus {
        let labels = LabelVocab::from_observed(Vec::<String>::new());
        Corpus::new(
            vec![Document {
                id: "d".into(),
                domain: "nw".into(),
                sentences: vec![Sentence {
                    tokens: vec![Token {
                        surface: surface.into(),
                        embedding: vec![],
                        gold_label: 0,
                    }],
                    deps: vec![],
                }],
            }],
            labels,
            0,
        )
        .unwrap()
    }

    #[test]
    fn parses_tsv_rows() {
        let t = table_from("hello\t1.0 2.0 3.0\nworld\t-1.0 0.5 0.25\n");
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("hello").unwrap(), &[1.0, 2.0, 3.0]);
        assert!(t.get("mars").is_none());
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"a\t1.0 2.0\nb\t1.0\n").unwrap();
        let err = load_embeddings(f.path()).unwrap_err();
        assert!(err.to_string().contains("expected 2"), "{err}");
    }

    #[test]
    fn attach_uses_table_and_fallback() {
        let t = table_from("known\t1.0 2.0\n<unk>\t0.0 0.0\n");
        let mut c = one_token_corpus("known");
        let r = attach_embeddings(&mut c, &t).unwrap();
        assert_eq!(r, AttachReport { attached: 1, fallbacks: 0 });
        assert_eq!(c.embedding_dim(), 2);
        assert_eq!(c.docs[0].sentences[0].tokens[0].embedding, vec![1.0, 2.0]);

        let mut c = one_token_corpus("novel");
        let r = attach_embeddings(&mut c, &t).unwrap();
        assert_eq!(r, AttachReport { attached: 0, fallbacks: 1 });
        assert_eq!(c.docs[0].sentences[0].tokens[0].embedding, vec![0.0, 0.0]);
    }

    #[test]
    fn missing_word_without_fallback_names_the_word() {
        let t = table_from("known\t1.0 2.0\n");
        let mut c = one_token_corpus("absent");
        let err = attach_embeddings(&mut c, &t).unwrap_err();
        assert!(err.to_string().contains("\"absent\""), "{err}");
    }
}
