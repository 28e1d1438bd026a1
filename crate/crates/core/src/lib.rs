//! Data-independent privacy checking and repair of source-to-target tgds.
//!
//! A set of s-t tgds is *safe* with respect to a set of policy views when
//! everything a third party can infer from the target is already inferable
//! from the views. [`safety::is_safe`] decides this with the visible chase
//! ([`chase::visible_chase`]), and [`repair::repair`] rewrites unsafe tgds by
//! hiding exported variables and breaking body joins, ranking candidate
//! rewrites with a [`preference::Preference`].
//!
//! ```
//! use maprepair::model::{parse_dependencies, parse_schema};
//! use maprepair::safety::{is_safe, Verdict};
//!
//! let schema = parse_schema("R/2\n").unwrap();
//! let views = parse_dependencies("R(x,y) -> V(x).", Some(&schema), None).unwrap();
//! let leaky = parse_dependencies("R(x,y) -> T(x,y).", Some(&schema), None).unwrap();
//! assert_eq!(is_safe(&leaky, &views, &schema).verdict, Verdict::Unsafe);
//! ```

pub mod chase;
pub mod error;
pub mod homomorphism;
pub mod model;
pub mod preference;
pub mod repair;
pub mod safety;
pub mod scenario;

pub use error::{Error, Result};

/// Preference function with `f64` distances.
pub type PreferenceFunction = preference::Preference<f64>;
/// k-NN classifier with `f64` distances.
pub type Knn = preference::KnnClassifier<f64>;
/// k-NN classifier with `f32` distances.
pub type Knn32 = preference::KnnClassifier<f32>;
