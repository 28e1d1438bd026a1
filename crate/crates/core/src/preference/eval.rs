//! Confusion matrix and Matthews correlation coefficient.

use serde::{Deserialize, Serialize};

use super::{Choice, Prefer};
use crate::model::Tgd;

use super::Scalar;

/// Counts of (predicted, expected) label pairs; label 1 is `First`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// Predicted 1, expected 1.
    pub n11: u64,
    /// Predicted 2, expected 2.
    pub n22: u64,
    /// Predicted 1, expected 2.
    pub n12: u64,
    /// Predicted 2, expected 1.
    pub n21: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, predicted: Choice, expected: Choice) {
        match (predicted, expected) {
            (Choice::First, Choice::First) => self.n11 += 1,
            (Choice::Second, Choice::Second) => self.n22 += 1,
            (Choice::First, Choice::Second) => self.n12 += 1,
            (Choice::Second, Choice::First) => self.n21 += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.n11 + self.n22 + self.n12 + self.n21
    }

    pub fn mcc<T: Scalar>(&self) -> T {
        mcc(self)
    }
}

/// MCC of a confusion matrix; 0 when any marginal is empty.
pub fn mcc<T: Scalar>(m: &ConfusionMatrix) -> T {
    let f = |x: u64| T::from(x).expect("count fits the scalar type");
    let (n11, n22, n12, n21) = (f(m.n11), f(m.n22), f(m.n12), f(m.n21));
    let factors = [n11 + n12, n11 + n21, n22 + n12, n22 + n21];
    if factors.iter().any(|x| x.is_zero()) {
        return T::zero();
    }
    let denom = factors.iter().fold(T::one(), |acc, &x| acc * x).sqrt();
    (n11 * n22 - n12 * n21) / denom
}

/// Compares `learned` against `golden` on every pair.
pub fn evaluate(golden: &dyn Prefer, learned: &dyn Prefer, pairs: &[(Tgd, Tgd)]) -> (ConfusionMatrix, f64) {
    let mut m = ConfusionMatrix::default();
    for (a, b) in pairs {
        m.record(learned.choose(a, b), golden.choose(a, b));
    }
    let score = mcc::<f64>(&m);
    (m, score)
}
