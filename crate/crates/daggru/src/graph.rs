//! Per-sentence DAG construction. Each sentence yields two DAGs over its
//! token positions:
//!
//! * the **forward** DAG, where token `t` receives edges only from earlier
//!   tokens `t' < t`: a temporal edge from `t-1` plus one edge per
//!   dependency arc whose other endpoint lies earlier in the sentence;
//! * the **backward** DAG, the mirror image (edges only from later tokens).
//!
//! Dependency edges are typed by the relation label *and the source
//! token's role* in the arc: `nsubj-child` means the source token is the
//! dependent (child) of an `nsubj` arc. Both DAGs are cycle-free by
//! construction because every edge respects a strict linear order.

use std::collections::HashMap;

use crate::corpus::{Document, Sentence};

/// Index into an [`EdgeVocab`].
pub type EdgeTypeId = usize;

pub const TEMPORAL_ID: EdgeTypeId = 0;
pub const UNKNOWN_DEP_ID: EdgeTypeId = 1;

/// Which end of the dependency arc the *source* token of a DAG edge is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceRole {
    Child,
    Parent,
}

impl SourceRole {
    fn suffix(self) -> &'static str {
        match self {
            SourceRole::Child => "child",
            SourceRole::Parent => "parent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeType {
    /// Adjacent-token edge present in every sentence.
    Temporal,
    /// Any dependency relation not seen when the vocabulary was built.
    UnknownDep,
    Dependency { label: String, source_role: SourceRole },
}

impl EdgeType {
    pub fn name(&self) -> String {
        match self {
            EdgeType::Temporal => "temporal".into(),
            EdgeType::UnknownDep => "UNKNOWN-DEP".into(),
            EdgeType::Dependency { label, source_role } => {
                format!("{label}-{}", source_role.suffix())
            }
        }
    }
}

/// Edge-type inventory. Ids are stable across runs: temporal is 0,
/// UNKNOWN-DEP is 1, and dependency types follow sorted by (label, role)
/// with child before parent. Every label observed at build time registers
/// both roles, since each arc is seen from one side in each DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeVocab {
    types: Vec<EdgeType>,
    index: HashMap<(String, SourceRole), EdgeTypeId>,
}

impl EdgeVocab {
    /// Build from the dependency labels in `docs` (the training partition).
    pub fn from_docs<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut labels: Vec<String> = docs
            .into_iter()
            .flat_map(|d| &d.sentences)
            .flat_map(|s| &s.deps)
            .map(|d| d.label.clone())
            .collect();
        labels.sort();
        labels.dedup();

        let mut types = vec![EdgeType::Temporal, EdgeType::UnknownDep];
        for label in labels {
            for role in [SourceRole::Child, SourceRole::Parent] {
                types.push(EdgeType::Dependency {
                    label: label.clone(),
                    source_role: role,
                });
            }
        }
        let index = types
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                EdgeType::Dependency { label, source_role } => {
                    Some(((label.clone(), *source_role), i))
                }
                _ => None,
            })
            .collect();
        EdgeVocab { types, index }
    }

    /// Rebuild from stored type names (checkpoint loading). Names must be
    /// in vocabulary order, starting with temporal and UNKNOWN-DEP.
    pub fn from_names(names: &[String]) -> Option<Self> {
        if names.len() < 2 || names[0] != "temporal" || names[1] != "UNKNOWN-DEP" {
            return None;
        }
        let mut types = vec![EdgeType::Temporal, EdgeType::UnknownDep];
        for name in &names[2..] {
            let (label, role) = name.rsplit_once('-')?;
            let source_role = match role {
                "child" => SourceRole::Child,
                "parent" => SourceRole::Parent,
                _ => return None,
            };
            types.push(EdgeType::Dependency {
                label: label.to_string(),
                source_role,
            });
        }
        let index = types
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                EdgeType::Dependency { label, source_role } => {
                    Some(((label.clone(), *source_role), i))
                }
                _ => None,
            })
            .collect();
        Some(EdgeVocab { types, index })
    }

    /// Dependency type id for (label, source role); unseen labels map to
    /// UNKNOWN-DEP.
    pub fn lookup(&self, label: &str, role: SourceRole) -> EdgeTypeId {
        self.index
            .get(&(label.to_string(), role))
            .copied()
            .unwrap_or(UNKNOWN_DEP_ID)
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        false // temporal and UNKNOWN-DEP are always present
    }

    pub fn names(&self) -> Vec<String> {
        self.types.iter().map(|t| t.name()).collect()
    }
}

/// Incoming-edge lists for one sentence: `forward[t]` / `backward[t]` hold
/// `(source_position, edge_type)` pairs. Within each list the temporal edge
/// comes first, then dependency edges in sentence order; multiplicities are
/// preserved, so a dependency between adjacent tokens contributes a second
/// edge alongside the temporal one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagGraph {
    pub forward: Vec<Vec<(usize, EdgeTypeId)>>,
    pub backward: Vec<Vec<(usize, EdgeTypeId)>>,
}

/// Build both DAGs for a sentence against a fixed edge vocabulary (unseen
/// dependency labels become UNKNOWN-DEP).
pub fn build_dags(sentence: &Sentence, vocab: &EdgeVocab) -> DagGraph {
    let n = sentence.tokens.len();
    let mut forward: Vec<Vec<(usize, EdgeTypeId)>> = (0..n)
        .map(|t| {
            if t > 0 {
                vec![(t - 1, TEMPORAL_ID)]
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut backward: Vec<Vec<(usize, EdgeTypeId)>> = (0..n)
        .map(|t| {
            if t + 1 < n {
                vec![(t + 1, TEMPORAL_ID)]
            } else {
                Vec::new()
            }
        })
        .collect();

    for dep in &sentence.deps {
        let (earlier, later) = if dep.head < dep.dependent {
            (dep.head, dep.dependent)
        } else {
            (dep.dependent, dep.head)
        };
        let role_of = |pos: usize| {
            if pos == dep.head {
                SourceRole::Parent
            } else {
                SourceRole::Child
            }
        };
        // Forward DAG: the later token hears from the earlier one.
        forward[later].push((earlier, vocab.lookup(&dep.label, role_of(earlier))));
        // Backward DAG: the earlier token hears from the later one.
        backward[earlier].push((later, vocab.lookup(&dep.label, role_of(later))));
    }
    DagGraph { forward, backward }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DependencyEdge, Document, Token};

    fn sentence(n: usize, deps: Vec<(usize, usize, &str)>) -> Sentence {
        Sentence {
            tokens: (0..n)
                .map(|i| Token {
                    surface: format!("t{i}"),
                    embedding: vec![],
                    gold_label: 0,
                })
                .collect(),
            deps: deps
                .into_iter()
                .map(|(head, dependent, label)| DependencyEdge {
                    head,
                    dependent,
                    label: label.into(),
                })
                .collect(),
        }
    }

    fn doc_of(s: Sentence) -> Document {
        Document {
            id: "d".into(),
            domain: "nw".into(),
            sentences: vec![s],
        }
    }

    #[test]
    fn plain_sentence_gets_only_temporal_edges() {
        let s = sentence(3, vec![]);
        let vocab = EdgeVocab::from_docs([&doc_of(s.clone())]);
        assert_eq!(vocab.len(), 2);
        let g = build_dags(&s, &vocab);
        assert_eq!(g.forward, vec![vec![], vec![(0, TEMPORAL_ID)], vec![(1, TEMPORAL_ID)]]);
        assert_eq!(g.backward, vec![vec![(1, TEMPORAL_ID)], vec![(2, TEMPORAL_ID)], vec![]]);
    }

    #[test]
    fn vocab_orders_labels_then_roles() {
        let s = sentence(3, vec![(2, 0, "nsubj"), (2, 1, "auxpass")]);
        let vocab = EdgeVocab::from_docs([&doc_of(s)]);
        assert_eq!(
            vocab.names(),
            vec![
                "temporal",
                "UNKNOWN-DEP",
                "auxpass-child",
                "auxpass-parent",
                "nsubj-child",
                "nsubj-parent"
            ]
        );
        assert_eq!(vocab.lookup("nsubj", SourceRole::Child), 4);
        assert_eq!(vocab.lookup("nsubj", SourceRole::Parent), 5);
        assert_eq!(vocab.lookup("never-seen", SourceRole::Child), UNKNOWN_DEP_ID);
    }

    #[test]
    fn subject_verb_example_routes_roles_correctly() {
        // "members(0) were(1) hacked(2)" with nsubj(hacked -> members) and
        // auxpass(hacked -> were). In the forward DAG "hacked" hears from
        // "members" as the *child* of the nsubj arc; in the backward DAG
        // "members" hears from "hacked" as the *parent* of that arc.
        let s = sentence(3, vec![(2, 0, "nsubj"), (2, 1, "auxpass")]);
        let vocab = EdgeVocab::from_docs([&doc_of(s.clone())]);
        let g = build_dags(&s, &vocab);

        let nsubj_child = vocab.lookup("nsubj", SourceRole::Child);
        let nsubj_parent = vocab.lookup("nsubj", SourceRole::Parent);
        let auxpass_child = vocab.lookup("auxpass", SourceRole::Child);
        let auxpass_parent = vocab.lookup("auxpass", SourceRole::Parent);

        assert_eq!(g.forward[0], vec![]);
        assert_eq!(g.forward[1], vec![(0, TEMPORAL_ID)]);
        // "hacked" consumes three rows: temporal from "were", "members" as
        // nsubj child, and "were" again as auxpass child (multiplicity!).
        assert_eq!(
            g.forward[2],
            vec![(1, TEMPORAL_ID), (0, nsubj_child), (1, auxpass_child)]
        );

        assert_eq!(g.backward[0], vec![(1, TEMPORAL_ID), (2, nsubj_parent)]);
        assert_eq!(g.backward[1], vec![(2, TEMPORAL_ID), (2, auxpass_parent)]);
        assert_eq!(g.backward[2], vec![]);
    }

    #[test]
    fn vocab_is_input_order_independent() {
        let s1 = sentence(2, vec![(0, 1, "obj")]);
        let s2 = sentence(2, vec![(1, 0, "amod")]);
        let (d1, d2) = (doc_of(s1), doc_of(s2));
        let a = EdgeVocab::from_docs([&d1, &d2]);
        let b = EdgeVocab::from_docs([&d2, &d1]);
        assert_eq!(a, b);
    }

    #[test]
    fn vocab_names_round_trip() {
        let s = sentence(3, vec![(2, 0, "nsubj"), (0, 1, "compound-prt")]);
        let vocab = EdgeVocab::from_docs([&doc_of(s)]);
        let back = EdgeVocab::from_names(&vocab.names()).unwrap();
        assert_eq!(vocab, back);
        assert!(EdgeVocab::from_names(&["bogus".into()]).is_none());
    }

    proptest::proptest! {
        #[test]
        fn dags_respect_the_linear_order(
            n in 2usize..10,
            raw_deps in proptest::collection::vec((0usize..10, 0usize..10), 0..8)
        ) {
            let deps: Vec<(usize, usize, &str)> = raw_deps
                .into_iter()
                .map(|(a, b)| (a % n, b % n))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a, b, "dep"))
                .collect();
            let n_deps = deps.len();
            let s = sentence(n, deps);
            let vocab = EdgeVocab::from_docs([&doc_of(s.clone())]);
            let g = build_dags(&s, &vocab);

            // Strict ordering means no cycles are possible.
            for (t, incoming) in g.forward.iter().enumerate() {
                for &(src, _) in incoming {
                    proptest::prop_assert!(src < t);
                }
            }
            for (t, incoming) in g.backward.iter().enumerate() {
                for &(src, _) in incoming {
                    proptest::prop_assert!(src > t);
                }
            }

            // Every dependency arc appears exactly once per DAG, on top of
            // the n-1 temporal edges.
            let fwd_total: usize = g.forward.iter().map(|v| v.len()).sum();
            let bwd_total: usize = g.backward.iter().map(|v| v.len()).sum();
            proptest::prop_assert_eq!(fwd_total, (n - 1) + n_deps);
            proptest::prop_assert_eq!(bwd_total, (n - 1) + n_deps);
        }
    }
}
