use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;

use super::types::{Corpus, DependencyEdge, Document, LabelVocab, Sentence, Token};
use super::CorpusError;

/// Knobs for [`generate_synthetic`].
///
/// Every sentence is 8-12 tokens with a random projective dependency tree.
/// A `trigger_rate` fraction of sentences contain one labeled trigger
/// token. Of those, a `dep_fraction` fraction use a *dependency-conditioned*
/// trigger: its surface form is only a trigger when an activator word sits
/// dependency-adjacent to it, and the activator is always placed at linear
/// distance >= 4. Matching distractor sentences carry the same surface form
/// with the activator present but *not* dependency-adjacent, so surface and
/// linear-window features cannot separate the classes — only models that
/// read the dependency structure can.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_docs: usize,
    pub sentences_per_doc: usize,
    pub vocab_size: usize,
    pub n_event_types: usize,
    pub k: usize,
    pub trigger_rate: f64,
    pub dep_fraction: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 1,
            n_docs: 200,
            sentences_per_doc: 4,
            vocab_size: 120,
            n_event_types: 5,
            k: 16,
            trigger_rate: 0.5,
            dep_fraction: 0.5,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: &str| Err(CorpusError::BadConfig(m.into()));
        if self.n_docs == 0 || self.sentences_per_doc == 0 {
            return bad("need at least one document and one sentence per document");
        }
        if self.vocab_size < 8 {
            return bad("vocab_size must be at least 8");
        }
        if self.n_event_types == 0 {
            return bad("n_event_types must be at least 1");
        }
        if self.k == 0 {
            return bad("embedding width k must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.trigger_rate) || !(0.0..=1.0).contains(&self.dep_fraction) {
            return bad("trigger_rate and dep_fraction must lie in [0, 1]");
        }
        Ok(())
    }
}

const DOMAINS: [&str; 3] = ["nw", "bc", "wl"];
const ACTIVATORS: [&str; 4] = ["act0", "act1", "act2", "act3"];
const DEP_LABELS: [&str; 8] = [
    "nsubj", "obj", "det", "amod", "advmod", "obl", "nmod", "case",
];
const MIN_LEN: usize = 8;
const MAX_LEN: usize = 12;
/// Linear trigger-activator distance; far enough that a small convolution
/// or leaky recency signal cannot see the activator.
const MIN_ACTIVATOR_GAP: usize = 4;

pub(crate) fn filler_surface(i: usize) -> String {
    format!("w{i:04}")
}

pub(crate) fn unconditional_trigger_surface(event: usize) -> String {
    format!("trig_u{event}")
}

pub(crate) fn conditional_trigger_surface(event: usize) -> String {
    format!("trig_c{event}")
}

pub(crate) fn event_label(event: usize) -> String {
    format!("EV{event:02}")
}

#[cfg(test)]
fn is_activator_surface(s: &str) -> bool {
    ACTIVATORS.contains(&s)
}

/// How the position `a` must relate to the root of the generated tree.
#[derive(Clone, Copy)]
enum RootConstraint {
    Free,
    /// `a` must be a direct dependent of the root.
    DirectChild(usize),
    /// `a` must NOT be a direct dependent of the root (depth >= 2).
    Buried(usize),
}

/// Split `lo..hi` into 1+ contiguous chunks with random boundaries.
fn random_chunks(rng: &mut ChaCha12Rng, lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut chunks = Vec::new();
    let mut start = lo;
    for i in lo + 1..hi {
        if rng.random_bool(0.35) {
            chunks.push((start, i));
            start = i;
        }
    }
    chunks.push((start, hi));
    chunks
}

/// Attach every position in `lo..hi` (which excludes `head`) beneath
/// `head`, keeping subtrees contiguous so the tree stays projective.
fn grow_side(
    rng: &mut ChaCha12Rng,
    lo: usize,
    hi: usize,
    head: usize,
    constraint: RootConstraint,
    edges: &mut Vec<(usize, usize)>,
) {
    if lo >= hi {
        return;
    }
    match constraint {
        RootConstraint::Buried(a) if (lo..hi).contains(&a) => {
            // One chunk spanning the whole side, headed by anything but
            // `a`, so `a` ends up at depth >= 2 from the root.
            let mut sub = rng.random_range(lo..hi);
            while sub == a {
                sub = rng.random_range(lo..hi);
            }
            edges.push((head, sub));
            grow_subtree(rng, lo, hi, sub, edges);
        }
        _ => {
            for (clo, chi) in random_chunks(rng, lo, hi) {
                let sub = match constraint {
                    RootConstraint::DirectChild(a) if (clo..chi).contains(&a) => a,
                    _ => rng.random_range(clo..chi),
                };
                edges.push((head, sub));
                grow_subtree(rng, clo, chi, sub, edges);
            }
        }
    }
}

fn grow_subtree(
    rng: &mut ChaCha12Rng,
    lo: usize,
    hi: usize,
    head: usize,
    edges: &mut Vec<(usize, usize)>,
) {
    grow_side(rng, lo, head, head, RootConstraint::Free, edges);
    grow_side(rng, head + 1, hi, head, RootConstraint::Free, edges);
}

/// Random projective tree over `0..n` rooted at `root`; yields `(head,
/// dependent)` pairs, one per non-root position.
fn random_tree(
    rng: &mut ChaCha12Rng,
    n: usize,
    root: usize,
    constraint: RootConstraint,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(n - 1);
    grow_side(rng, 0, root, root, constraint, &mut edges);
    grow_side(rng, root + 1, n, root, constraint, &mut edges);
    edges
}

/// A position at linear distance >= MIN_ACTIVATOR_GAP from `p`; sentences
/// of length >= 8 always have one.
fn pick_far_position(rng: &mut ChaCha12Rng, len: usize, p: usize) -> usize {
    let candidates: Vec<usize> = (0..len)
        .filter(|&i| i.abs_diff(p) >= MIN_ACTIVATOR_GAP)
        .collect();
    candidates[rng.random_range(0..candidates.len())]
}

struct PlannedToken {
    surface: String,
    label: Option<String>,
}

fn plan_sentence(rng: &mut ChaCha12Rng, cfg: &SyntheticConfig) -> (Vec<PlannedToken>, Vec<DependencyEdge>) {
    let len = rng.random_range(MIN_LEN..=MAX_LEN);
    let mut tokens: Vec<Option<PlannedToken>> = (0..len).map(|_| None).collect();

    let is_event = rng.random_bool(cfg.trigger_rate);
    let tree = if is_event {
        let event = rng.random_range(0..cfg.n_event_types);
        let conditional = cfg.dep_fraction > 0.0 && rng.random_bool(cfg.dep_fraction);
        let p = rng.random_range(0..len);
        if conditional {
            let a = pick_far_position(rng, len, p);
            tokens[p] = Some(PlannedToken {
                surface: conditional_trigger_surface(event),
                label: Some(event_label(event)),
            });
            tokens[a] = Some(PlannedToken {
                surface: ACTIVATORS[rng.random_range(0..ACTIVATORS.len())].to_string(),
                label: None,
            });
            random_tree(rng, len, p, RootConstraint::DirectChild(a))
        } else {
            tokens[p] = Some(PlannedToken {
                surface: unconditional_trigger_surface(event),
                label: Some(event_label(event)),
            });
            let root = rng.random_range(0..len);
            random_tree(rng, len, root, RootConstraint::Free)
        }
    } else {
        // Half of the would-be-conditional mass becomes distractors: same
        // conditional surface, activator present but buried, label NIL.
        let distractor = cfg.dep_fraction > 0.0 && rng.random_bool(cfg.dep_fraction * 0.5);
        if distractor {
            let event = rng.random_range(0..cfg.n_event_types);
            let p = rng.random_range(0..len);
            let a = pick_far_position(rng, len, p);
            tokens[p] = Some(PlannedToken {
                surface: conditional_trigger_surface(event),
                label: None,
            });
            tokens[a] = Some(PlannedToken {
                surface: ACTIVATORS[rng.random_range(0..ACTIVATORS.len())].to_string(),
                label: None,
            });
            random_tree(rng, len, p, RootConstraint::Buried(a))
        } else {
            let root = rng.random_range(0..len);
            random_tree(rng, len, root, RootConstraint::Free)
        }
    };

    let tokens = tokens
        .into_iter()
        .map(|slot| {
            slot.unwrap_or_else(|| PlannedToken {
                surface: filler_surface(rng.random_range(0..cfg.vocab_size)),
                label: None,
            })
        })
        .collect();

    let deps = tree
        .into_iter()
        .map(|(head, dependent)| DependencyEdge {
            head,
            dependent,
            label: DEP_LABELS[rng.random_range(0..DEP_LABELS.len())].to_string(),
        })
        .collect();
    (tokens, deps)
}

/// Deterministically generate an embedded corpus from the config; identical
/// configs yield byte-identical corpora.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Corpus, CorpusError> {
    cfg.validate()?;

    // Fixed-order embedding assignment from a dedicated stream, so vectors
    // don't depend on which sentences happen to be drawn.
    let mut emb_rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut embeddings: HashMap<String, Vec<f64>> = HashMap::new();
    let assign = |surface: String, rng: &mut ChaCha12Rng, map: &mut HashMap<String, Vec<f64>>| {
        let v: Vec<f64> = (0..cfg.k).map(|_| rng.random_range(-1.0..1.0)).collect();
        map.insert(surface, v);
    };
    for i in 0..cfg.vocab_size {
        assign(filler_surface(i), &mut emb_rng, &mut embeddings);
    }
    for a in ACTIVATORS {
        assign(a.to_string(), &mut emb_rng, &mut embeddings);
    }
    for e in 0..cfg.n_event_types {
        assign(unconditional_trigger_surface(e), &mut emb_rng, &mut embeddings);
        assign(conditional_trigger_surface(e), &mut emb_rng, &mut embeddings);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut planned_docs: Vec<Vec<(Vec<PlannedToken>, Vec<DependencyEdge>)>> = Vec::new();
    for _ in 0..cfg.n_docs {
        planned_docs.push(
            (0..cfg.sentences_per_doc)
                .map(|_| plan_sentence(&mut rng, cfg))
                .collect(),
        );
    }

    let labels = LabelVocab::from_observed(
        planned_docs
            .iter()
            .flatten()
            .flat_map(|(toks, _)| toks)
            .filter_map(|t| t.label.as_deref()),
    );

    let docs = planned_docs
        .into_iter()
        .enumerate()
        .map(|(di, sents)| Document {
            id: format!("doc{di:04}"),
            domain: DOMAINS[di % DOMAINS.len()].to_string(),
            sentences: sents
                .into_iter()
                .map(|(toks, deps)| Sentence {
                    tokens: toks
                        .into_iter()
                        .map(|t| Token {
                            embedding: embeddings[&t.surface].clone(),
                            gold_label: t
                                .label
                                .as_deref()
                                .map_or(super::types::NIL_ID, |l| {
                                    labels.id_of(l).expect("vocab built from these")
                                }),
                            surface: t.surface,
                        })
                        .collect(),
                    deps,
                })
                .collect(),
        })
        .collect();

    Corpus::new(docs, labels, cfg.k)
}
