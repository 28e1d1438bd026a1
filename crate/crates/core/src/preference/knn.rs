//! k-nearest-neighbour classification over feature vectors.

use std::fmt::Debug;

use num_traits::Float;

use super::{Choice, FeatureVector, Measurement};
use crate::error::{Error, Result};

/// Floating-point type used for distances.
pub trait Scalar: Float + Debug + Send + Sync + 'static {}

impl<T: Float + Debug + Send + Sync + 'static> Scalar for T {}

/// Instance-based classifier: stores every measurement and votes among the
/// `k` nearest under Euclidean distance.
#[derive(Clone, Debug)]
pub struct KnnClassifier<T: Scalar> {
    data: Vec<Measurement>,
    k: usize,
    _scalar: std::marker::PhantomData<T>,
}

/// Trains a k-NN model; fails on empty data or `k > data.len()`.
pub fn knn_train<T: Scalar>(data: Vec<Measurement>, k: usize) -> Result<KnnClassifier<T>> {
    KnnClassifier::new(data, k)
}

impl<T: Scalar> KnnClassifier<T> {
    pub fn new(data: Vec<Measurement>, k: usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if k > data.len() {
            return Err(Error::KTooLarge { k, n: data.len() });
        }
        Ok(KnnClassifier {
            data,
            k,
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.data
    }

    fn distance(a: FeatureVector, b: FeatureVector) -> T {
        let dx = T::from(a.delta_fv - b.delta_fv).expect("integer fits the scalar type");
        let dy = T::from(a.delta_j - b.delta_j).expect("integer fits the scalar type");
        (dx * dx + dy * dy).sqrt()
    }

    /// Majority label of the `k` nearest measurements. Equal distances keep
    /// training order; a tied vote goes to [`Choice::Second`].
    pub fn predict(&self, q: FeatureVector) -> Choice {
        let mut dists: Vec<(T, usize)> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, m)| (Self::distance(q, m.features), i))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("distances are finite").then(a.1.cmp(&b.1)));
        let firsts = dists[..self.k]
            .iter()
            .filter(|(_, i)| self.data[*i].choice == Choice::First)
            .count();
        if 2 * firsts > self.k {
            Choice::First
        } else {
            Choice::Second
        }
    }
}
