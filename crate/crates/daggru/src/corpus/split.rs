use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::types::Corpus;
use super::CorpusError;

/// Document-id lists naming a train/dev/test partition, as stored on disk
/// (JSON object with three arrays).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

/// A validated partition of a specific corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

impl CorpusSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.dev.len(), self.test.len())
    }
}

pub fn load_manifest(path: &Path) -> Result<SplitManifest, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
        path: path.display().to_string(),
        line: 0,
        detail: e.to_string(),
    })
}

pub fn save_manifest(manifest: &SplitManifest, path: &Path) -> Result<(), CorpusError> {
    let text = serde_json::to_string_pretty(manifest).expect("serializable");
    fs::write(path, text).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Check a manifest against a corpus: every id must exist and no id may sit
/// in two partitions. Returns the validated split.
pub fn standard_split(corpus: &Corpus, manifest: &SplitManifest) -> Result<CorpusSplit, CorpusError> {
    let mut seen: HashSet<&str> = HashSet::new();
    for id in manifest
        .train
        .iter()
        .chain(&manifest.dev)
        .chain(&manifest.test)
    {
        if !corpus.contains(id) {
            return Err(CorpusError::UnknownDoc { id: id.clone() });
        }
        if !seen.insert(id) {
            return Err(CorpusError::OverlappingSplit { id: id.clone() });
        }
    }
    Ok(CorpusSplit {
        train: manifest.train.clone(),
        dev: manifest.dev.clone(),
        test: manifest.test.clone(),
    })
}

/// Draw a fresh random split: shuffle the corpus's document ids with a
/// seeded ChaCha stream and deal the requested counts in train, dev, test
/// order. Deterministic in (corpus order, seed, counts).
pub fn random_split(
    corpus: &Corpus,
    seed: u64,
    counts: (usize, usize, usize),
) -> Result<CorpusSplit, CorpusError> {
    let (n_train, n_dev, n_test) = counts;
    let wanted = n_train + n_dev + n_test;
    if wanted > corpus.n_docs() {
        return Err(CorpusError::SplitTooLarge {
            wanted,
            available: corpus.n_docs(),
        });
    }
    if n_train == 0 {
        return Err(CorpusError::BadConfig(
            "random split needs at least one training document".into(),
        ));
    }
    let mut ids: Vec<String> = corpus.docs.iter().map(|d| d.id.clone()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let train = ids[..n_train].to_vec();
    let dev = ids[n_train..n_train + n_dev].to_vec();
    let test = ids[n_train + n_dev..wanted].to_vec();
    Ok(CorpusSplit { train, dev, test })
}
