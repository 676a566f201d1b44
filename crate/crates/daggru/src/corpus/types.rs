use std::collections::HashMap;

use super::CorpusError;

/// Index into a [`LabelVocab`]. 0 is always the NIL (no-trigger) label.
pub type LabelId = usize;

pub const NIL_LABEL: &str = "NIL";
pub const NIL_ID: LabelId = 0;

/// Bijective mapping between label names and dense ids, with NIL pinned at
/// index 0 and the remaining names sorted so ids are reproducible across
/// runs regardless of input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocab {
    names: Vec<String>,
    index: HashMap<String, LabelId>,
}

impl LabelVocab {
    /// Build from every non-NIL label name observed; duplicates are fine.
    pub fn from_observed<I, T>(labels: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut names: Vec<String> = labels
            .into_iter()
            .map(|l| l.as_ref().to_string())
            .filter(|l| l != NIL_LABEL)
            .collect();
        names.sort();
        names.dedup();
        names.insert(0, NIL_LABEL.to_string());
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        LabelVocab { names, index }
    }

    /// Rebuild from a stored name list (checkpoints). The list must start
    /// with NIL and contain no duplicates; order is preserved verbatim.
    pub fn from_names(names: &[String]) -> Option<Self> {
        if names.first().map(String::as_str) != Some(NIL_LABEL) {
            return None;
        }
        let index: HashMap<String, LabelId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        if index.len() != names.len() {
            return None;
        }
        Some(LabelVocab {
            names: names.to_vec(),
            index,
        })
    }

    pub fn id_of(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn name_of(&self, id: LabelId) -> Option<&str> {
        self.names.get(id).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // NIL is always present
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// One token: its surface form, an attached embedding (empty until an
/// embedding table is attached or the corpus was generated with vectors),
/// and its gold label id in the owning corpus's vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub surface: String,
    pub embedding: Vec<f64>,
    pub gold_label: LabelId,
}

/// Directed dependency edge between token positions within one sentence.
/// `head` governs `dependent`; `label` is the dependency relation name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyEdge {
    pub head: usize,
    pub dependent: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub deps: Vec<DependencyEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub domain: String,
    pub sentences: Vec<Sentence>,
}

/// A set of documents plus the label vocabulary they were loaded against.
/// `embedding_dim` is 0 while tokens carry no vectors.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub docs: Vec<Document>,
    pub labels: LabelVocab,
    embedding_dim: usize,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(
        docs: Vec<Document>,
        labels: LabelVocab,
        embedding_dim: usize,
    ) -> Result<Self, CorpusError> {
        let mut index = HashMap::new();
        for (i, d) in docs.iter().enumerate() {
            if index.insert(d.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateDoc { id: d.id.clone() });
            }
        }
        let corpus = Corpus {
            docs,
            labels,
            embedding_dim,
            index,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    /// Structural checks: non-empty sentences, in-bounds and non-self-loop
    /// dependency arcs, in-vocabulary labels, uniform embedding width.
    fn validate(&self) -> Result<(), CorpusError> {
        for doc in &self.docs {
            for (si, sent) in doc.sentences.iter().enumerate() {
                let bad = |detail: String| CorpusError::BadSentence {
                    doc: doc.id.clone(),
                    sentence: si,
                    detail,
                };
                let n = sent.tokens.len();
                if n == 0 {
                    return Err(bad("sentence has no tokens".into()));
                }
                for (ti, tok) in sent.tokens.iter().enumerate() {
                    if tok.gold_label >= self.labels.len() {
                        return Err(bad(format!(
                            "token {ti} has label id {} outside the vocabulary",
                            tok.gold_label
                        )));
                    }
                    if tok.embedding.len() != self.embedding_dim {
                        return Err(bad(format!(
                            "token {ti} ({:?}) has embedding width {}, corpus uses {}",
                            tok.surface,
                            tok.embedding.len(),
                            self.embedding_dim
                        )));
                    }
                    if !tok.embedding.iter().all(|v| v.is_finite()) {
                        return Err(bad(format!(
                            "token {ti} ({:?}) has a non-finite embedding value",
                            tok.surface
                        )));
                    }
                }
                for (ei, dep) in sent.deps.iter().enumerate() {
                    if dep.head >= n || dep.dependent >= n {
                        return Err(bad(format!(
                            "dependency {ei} ({} -> {}) out of range for {n} tokens",
                            dep.head, dep.dependent
                        )));
                    }
                    if dep.head == dep.dependent {
                        return Err(bad(format!(
                            "dependency {ei} is a self-loop on token {}",
                            dep.head
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn doc(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Embedding width; 0 means vectors have not been attached yet.
    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    pub(crate) fn set_embedding_dim(&mut self, k: usize) {
        self.embedding_dim = k;
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn n_tokens(&self) -> usize {
        self.docs
            .iter()
            .flat_map(|d| &d.sentences)
            .map(|s| s.tokens.len())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocab_pins_nil_and_sorts_the_rest() {
        let v = LabelVocab::from_observed(["Attack", "NIL", "Die", "Attack"]);
        assert_eq!(v.names(), &["NIL", "Attack", "Die"]);
        assert_eq!(v.id_of("NIL"), Some(0));
        assert_eq!(v.id_of("Attack"), Some(1));
        assert_eq!(v.name_of(2), Some("Die"));
        assert_eq!(v.id_of("Transport"), None);
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn vocab_of_only_nil_has_length_one() {
        let v = LabelVocab::from_observed(Vec::<String>::new());
        assert_eq!(v.len(), 1);
        assert_eq!(v.name_of(NIL_ID), Some(NIL_LABEL));
    }

    fn tok(surface: &str) -> Token {
        Token {
            surface: surface.into(),
            embedding: vec![],
            gold_label: NIL_ID,
        }
    }

    #[test]
    fn corpus_rejects_bad_structure() {
        let labels = LabelVocab::from_observed(Vec::<String>::new());
        let empty_sentence = Document {
            id: "d1".into(),
            domain: "nw".into(),
            sentences: vec![Sentence {
                tokens: vec![],
                deps: vec![],
            }],
        };
        assert!(Corpus::new(vec![empty_sentence], labels.clone(), 0).is_err());

        let self_loop = Document {
            id: "d1".into(),
            domain: "nw".into(),
            sentences: vec![Sentence {
                tokens: vec![tok("a"), tok("b")],
                deps: vec![DependencyEdge {
                    head: 1,
                    dependent: 1,
                    label: "det".into(),
                }],
            }],
        };
        let err = Corpus::new(vec![self_loop], labels.clone(), 0).unwrap_err();
        assert!(err.to_string().contains("self-loop"), "{err}");

        let dup_a = Document {
            id: "same".into(),
            domain: "nw".into(),
            sentences: vec![Sentence {
                tokens: vec![tok("a")],
                deps: vec![],
            }],
        };
        let dup_b = dup_a.clone();
        let err = Corpus::new(vec![dup_a, dup_b], labels, 0).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateDoc { .. }));
    }

    #[test]
    fn doc_lookup_by_id() {
        let labels = LabelVocab::from_observed(Vec::<String>::new());
        let d = Document {
            id: "x7".into(),
            domain: "bc".into(),
            sentences: vec![Sentence {
                tokens: vec![tok("hello")],
                deps: vec![],
            }],
        };
        let c = Corpus::new(vec![d], labels, 0).unwrap();
        assert!(c.contains("x7"));
        assert_eq!(c.doc("x7").unwrap().domain, "bc");
        assert!(c.doc("nope").is_none());
        assert_eq!(c.n_tokens(), 1);
    }
}
