//! Micro-averaged F1 over (gold, predicted) label pairs. NIL (label 0) is
//! the non-trigger class and never counts as a positive.

use crate::corpus::{LabelId, NIL_ID};

/// Token-level confusion counts in the micro-averaged sense: a true
/// positive needs an exact non-NIL label match.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn observe(&mut self, gold: LabelId, pred: LabelId) {
        if pred != NIL_ID && pred == gold {
            self.tp += 1;
        } else {
            // A wrong non-NIL prediction is a false positive; a missed
            // non-NIL gold is a false negative. A non-NIL -> different
            // non-NIL confusion is both.
            if pred != NIL_ID {
                self.fp += 1;
            }
            if gold != NIL_ID {
                self.fn_ += 1;
            }
        }
    }

    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    /// Harmonic mean of precision and recall. With no gold positives and
    /// no predicted positives there is nothing to get wrong, so 1.0; with
    /// positives on one side only, 0.0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Micro-F1 of a batch of (gold, predicted) pairs.
pub fn micro_f1(pairs: &[(LabelId, LabelId)]) -> f64 {
    let mut c = Confusion::default();
    for &(gold, pred) in pairs {
        c.observe(gold, pred);
    }
    c.f1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_confusion() {
        // gold:  1 1 0 2 0 2
        // pred:  1 0 1 1 0 2
        // TP = 2 (positions 0 and 5), FP = 2 (positions 2 and 3),
        // FN = 2 (positions 1 and 3: the gold-2 mislabeled as 1).
        let pairs = [(1, 1), (1, 0), (0, 1), (2, 1), (0, 0), (2, 2)];
        let mut c = Confusion::default();
        for (g, p) in pairs {
            c.observe(g, p);
        }
        assert_eq!((c.tp, c.fp, c.fn_), (2, 2, 2));
        assert!((c.precision() - 0.5).abs() < 1e-15);
        assert!((c.recall() - 0.5).abs() < 1e-15);
        assert!((micro_f1(&pairs) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nil_only_agreement_is_not_rewarded() {
        // All-NIL gold predicted all-NIL: vacuously perfect.
        assert_eq!(micro_f1(&[(0, 0), (0, 0)]), 1.0);
        // All-NIL gold with one trigger hallucinated: zero.
        assert_eq!(micro_f1(&[(0, 0), (0, 3)]), 0.0);
        // Triggers all missed: zero.
        assert_eq!(micro_f1(&[(1, 0), (2, 0)]), 0.0);
    }

    #[test]
    fn cross_type_confusion_costs_both_ways() {
        // One token, gold 1 predicted 2: precision 0/1, recall 0/1.
        let mut c = Confusion::default();
        c.observe(1, 2);
        assert_eq!((c.tp, c.fp, c.fn_), (0, 1, 1));
        assert_eq!(c.f1(), 0.0);
    }

    #[test]
    fn perfect_and_fractional_cases() {
        assert_eq!(micro_f1(&[(1, 1), (0, 0), (2, 2)]), 1.0);
        // 1 TP, 1 FN: precision 1, recall 0.5, F1 = 2/3.
        let f1 = micro_f1(&[(1, 1), (2, 0), (0, 0)]);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-15);
    }
}
