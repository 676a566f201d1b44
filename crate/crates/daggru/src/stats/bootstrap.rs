//! Bootstrap model selection over (dev F1, test F1) run pairs: each
//! replicate draws k runs with replacement, keeps the one with the best
//! dev score, and reports the mean of the winners' test scores.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::summary::ci_halfwidth;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapSelection {
    /// Mean test score of the dev-selected run across replicates.
    pub mean: f64,
    /// 95% Student-t half-width over the replicate values.
    pub half_width: Option<f64>,
    pub k: usize,
    pub reps: usize,
}

/// Index of the winner among drawn runs: best dev score, ties broken by
/// higher test score, then by lower index (stable for byte-identical
/// reruns).
fn best_of(pairs: &[(f64, f64)], draws: &[usize]) -> usize {
    let mut best = draws[0];
    for &i in &draws[1..] {
        let (dev, test) = pairs[i];
        let (bdev, btest) = pairs[best];
        if dev > bdev || (dev == bdev && (test > btest || (test == btest && i < best))) {
            best = i;
        }
    }
    best
}

/// `pairs` are (dev F1, test F1) per run. Draw order is fixed: replicates
/// outermost, k draws inner, one `random_range` each, so results are
/// deterministic in (pairs order, k, reps, seed).
pub fn bootstrap_selection(
    pairs: &[(f64, f64)],
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<BootstrapSelection, StatsError> {
    if pairs.is_empty() {
        return Err(StatsError::SampleTooSmall {
            test: "bootstrap selection",
            needed: 1,
            got: 0,
        });
    }
    if k == 0 || reps == 0 {
        return Err(StatsError::BadConfig(
            "bootstrap needs k >= 1 draws and reps >= 1 replicates".into(),
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut winners = Vec::with_capacity(reps);
    let mut draws = vec![0usize; k];
    for _ in 0..reps {
        for d in draws.iter_mut() {
            *d = rng.random_range(0..pairs.len());
        }
        winners.push(pairs[best_of(pairs, &draws)].1);
    }
    let agg = super::summary::aggregate(&winners).expect("reps >= 1");
    Ok(BootstrapSelection {
        mean: agg.mean,
        half_width: ci_halfwidth(agg.std, reps),
        k,
        reps,
    })
}
