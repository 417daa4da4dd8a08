//! Machine teaching for kernel perceptrons.
//!
//! A teacher builds small labeled sets from which a perceptron learner
//! recovers a target decision boundary: exactly for linear and polynomial
//! kernels, approximately for the Gaussian kernel through a Taylor-truncated
//! feature space.

pub mod datasets;
pub mod error;
pub mod eval;
pub mod kernel;
pub mod learner;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod sample;
pub mod teacher;

pub use error::{Error, Result};
pub use kernel::{
    choose_truncation, eval_kernel, feature_dim, taylor_tail_bound, ApproxConfig, FeatureMap,
    FeatureVector, KernelSpec, MultiIndex,
};
pub use learner::{brute_force_fit, fit, training_loss, Fit, LearnerConfig};
pub use model::{decision_value, rkhs_norm, DualModel, Hypothesis, Model, PrimalModel};
pub use sample::{Label, Sample, Tag, TeachingItem, TeachingSet};
