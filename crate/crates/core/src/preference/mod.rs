//! Pairwise preference between candidate repairs.
//!
//! A comparison looks only at two features of the pair `(first, second)`:
//! `delta_fv`, the exported-variable count of `second` minus that of
//! `first`, and `delta_j`, the same difference for body joins. Every
//! preference function answers [`Choice::First`] or [`Choice::Second`].

mod eval;
mod knn;
mod training;

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Tgd;

pub use eval::{evaluate, mcc, ConfusionMatrix};
pub use knn::{knn_train, KnnClassifier, Scalar};
pub use training::{generate_training_set, read_training_csv, write_training_csv, ComparisonLog};

/// Which argument of a comparison wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    First,
    Second,
}

impl Choice {
    /// `1` for [`Choice::First`], `2` for [`Choice::Second`].
    pub fn label(self) -> u8 {
        match self {
            Choice::First => 1,
            Choice::Second => 2,
        }
    }

    pub fn from_label(l: u8) -> Option<Choice> {
        match l {
            1 => Some(Choice::First),
            2 => Some(Choice::Second),
            _ => None,
        }
    }
}

/// `(delta_fv, delta_j)` of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureVector {
    pub delta_fv: i64,
    pub delta_j: i64,
}

impl FeatureVector {
    pub fn new(delta_fv: i64, delta_j: i64) -> Self {
        FeatureVector { delta_fv, delta_j }
    }
}

/// A labeled comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub features: FeatureVector,
    pub choice: Choice,
}

/// Features of `(first, second)`, oriented second minus first.
pub fn features(first: &Tgd, second: &Tgd) -> FeatureVector {
    FeatureVector {
        delta_fv: second.exported_count() as i64 - first.exported_count() as i64,
        delta_j: second.join_count() as i64 - first.join_count() as i64,
    }
}

/// Prefers more exported variables, then more joins; `Second` on a full tie.
pub fn p_max_features(f: FeatureVector) -> Choice {
    match (f.delta_fv.signum(), f.delta_j.signum()) {
        (-1, _) => Choice::First,
        (1, _) => Choice::Second,
        (_, -1) => Choice::First,
        _ => Choice::Second,
    }
}

/// `First` iff the mean of the two deltas is negative.
pub fn p_avg_features(f: FeatureVector) -> Choice {
    let avg = Ratio::new(f.delta_fv + f.delta_j, 2);
    if avg < Ratio::from_integer(0) {
        Choice::First
    } else {
        Choice::Second
    }
}

pub fn p_max(first: &Tgd, second: &Tgd) -> Choice {
    p_max_features(features(first, second))
}

pub fn p_avg(first: &Tgd, second: &Tgd) -> Choice {
    p_avg_features(features(first, second))
}

/// Anything that can pick between two candidate repairs.
pub trait Prefer {
    fn choose(&self, first: &Tgd, second: &Tgd) -> Choice;

    /// Called by [`tournament`] with each candidate set of two or more
    /// repairs before any comparison.
    fn observe(&self, _candidates: &[Tgd]) {}
}

impl<F: Fn(&Tgd, &Tgd) -> Choice> Prefer for F {
    fn choose(&self, first: &Tgd, second: &Tgd) -> Choice {
        self(first, second)
    }
}

type CustomFn = dyn Fn(&Tgd, &Tgd) -> Choice + Send + Sync;

/// A preference function: one of the two golden functions, a trained k-NN
/// model, or a user-supplied closure.
#[derive(Clone)]
pub enum Preference<T: Scalar = f64> {
    PMax,
    PAvg,
    Knn(KnnClassifier<T>),
    Custom(Arc<CustomFn>),
}

impl<T: Scalar> Preference<T> {
    pub fn custom(f: impl Fn(&Tgd, &Tgd) -> Choice + Send + Sync + 'static) -> Self {
        Preference::Custom(Arc::new(f))
    }

    pub fn compare(&self, first: &Tgd, second: &Tgd) -> Choice {
        match self {
            Preference::PMax => p_max(first, second),
            Preference::PAvg => p_avg(first, second),
            Preference::Knn(m) => m.predict(features(first, second)),
            Preference::Custom(f) => f(first, second),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preference::PMax => "max",
            Preference::PAvg => "avg",
            Preference::Knn(_) => "knn",
            Preference::Custom(_) => "custom",
        }
    }
}

impl<T: Scalar> Prefer for Preference<T> {
    fn choose(&self, first: &Tgd, second: &Tgd) -> Choice {
        self.compare(first, second)
    }
}

impl<T: Scalar> fmt::Debug for Preference<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preference::Knn(m) => write!(f, "Knn(k={}, n={})", m.k(), m.len()),
            other => f.write_str(other.name()),
        }
    }
}

/// Left fold: the winner of `(c1, c2)` meets `c3`, and so on.
pub fn tournament(candidates: &[Tgd], prf: &dyn Prefer) -> Result<Tgd> {
    let (first, rest) = candidates.split_first().ok_or(Error::EmptyCandidates)?;
    if !rest.is_empty() {
        prf.observe(candidates);
    }
    let mut best = first;
    for c in rest {
        if prf.choose(best, c) == Choice::Second {
            best = c;
        }
    }
    Ok(best.clone())
}

/// Which comparisons a [`Recorder`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RecordMode {
    /// Every comparison the tournament actually makes.
    #[default]
    Tournament,
    /// Every pair `(c_i, c_j)` with `i < j` of each candidate set, judged by
    /// the wrapped function.
    AllPairs,
}

/// Wraps a preference function and records its comparisons.
pub struct Recorder<'a> {
    inner: &'a dyn Prefer,
    mode: RecordMode,
    log: RefCell<Vec<(Tgd, Tgd, Choice)>>,
}

impl<'a> Recorder<'a> {
    pub fn new(inner: &'a dyn Prefer) -> Self {
        Self::with_mode(inner, RecordMode::Tournament)
    }

    pub fn with_mode(inner: &'a dyn Prefer, mode: RecordMode) -> Self {
        Recorder {
            inner,
            mode,
            log: RefCell::new(Vec::new()),
        }
    }

    pub fn into_log(self) -> Vec<(Tgd, Tgd, Choice)> {
        self.log.into_inner()
    }
}

impl Prefer for Recorder<'_> {
    fn choose(&self, first: &Tgd, second: &Tgd) -> Choice {
        let c = self.inner.choose(first, second);
        if self.mode == RecordMode::Tournament {
            self.log.borrow_mut().push((first.clone(), second.clone(), c));
        }
        c
    }

    fn observe(&self, candidates: &[Tgd]) {
        if self.mode == RecordMode::AllPairs {
            let mut log = self.log.borrow_mut();
            for (i, a) in candidates.iter().enumerate() {
                for b in &candidates[i + 1..] {
                    log.push((a.clone(), b.clone(), self.inner.choose(a, b)));
                }
            }
        }
        self.inner.observe(candidates);
    }
}
