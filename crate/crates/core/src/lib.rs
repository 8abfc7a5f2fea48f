//! Numerical statistical-learning-theory toolkit.
//!
//! Synthetic generators with known population quantities, regularized ERM
//! (ridge, lasso, MLP), empirical Rademacher complexity (exact and Monte
//! Carlo), VC dimension by shattering search, Rademacher generalization
//! bounds, bias/variance/noise decomposition, cross-validation over a λ grid
//! and random-label memorization experiments.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The crate
//! root re-exports `f64` aliases; `f32` aliases live in [`single`].
//!
//! ```
//! use genlab::{datagen, hypotheses::HypothesisClass, complexity};
//!
//! let points: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
//! let all = HypothesisClass::all_labelings(&points).unwrap();
//! let ds = genlab::Dataset::from_xy(datagen::Task::Classification, points, vec![1.0; 6]).unwrap();
//! assert_eq!(complexity::rademacher_exact(&all, &ds).unwrap().value, 1.0);
//! ```

// `!(x >= 0.0)` is used on purpose to reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod biasvariance;
pub mod bounds;
pub mod complexity;
pub mod crossval;
pub mod datagen;
pub mod erm;
pub mod error;
pub mod experiments;
pub mod hypotheses;
mod linalg;
pub mod mlp;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use biasvariance::BVDecomposition;
pub use bounds::{BoundReport, BoundVariant};
pub use crossval::CVResult;
pub use datagen::{Generator, GeneratorKind, Task};
pub use erm::TrainerConfig;
pub use experiments::RandomizationReport;
pub use hypotheses::{LossFn, NormOrder};

pub type Dataset = datagen::Dataset<f64>;
pub type Hypothesis = hypotheses::Hypothesis<f64>;
pub type HypothesisClass = hypotheses::HypothesisClass<f64>;
pub type Mlp = mlp::Mlp<f64>;
pub type FitResult = erm::FitResult<f64>;
pub type ComplexityEstimate = complexity::ComplexityEstimate<f64>;

/// `f32` instantiations.
pub mod single {
    pub type Dataset = crate::datagen::Dataset<f32>;
    pub type Hypothesis = crate::hypotheses::Hypothesis<f32>;
    pub type HypothesisClass = crate::hypotheses::HypothesisClass<f32>;
    pub type Mlp = crate::mlp::Mlp<f32>;
    pub type FitResult = crate::erm::FitResult<f32>;
    pub type ComplexityEstimate = crate::complexity::ComplexityEstimate<f32>;
}
