//! Kernels, their explicit feature maps, and Taylor truncation of the
//! Gaussian kernel.
//!
//! Every finite-dimensional family has an explicit map `Φ` with
//! `K(x, x') = ⟨Φ(x), Φ(x')⟩`. Coordinates are laid out in graded order
//! (all order-0 monomials, then order 1, ...), lexicographically descending
//! within a grade, so truncating a Taylor-Gaussian map from order `s + 1`
//! down to `s` is a prefix cut.

pub mod combinatorics;
mod features;
mod truncation;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};

pub use features::{
    multi_indices, poly_feature_map, truncated_gaussian_feature_map, FeatureLayout, FeatureMap,
    FeatureVector, MultiIndex,
};
pub use truncation::{
    choose_truncation, taylor_tail_bound, ApproxConfig, DEFAULT_ANCHOR_Q, DEFAULT_BALL_FACTOR,
};

/// Kernel family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// Homogeneous polynomial kernel `⟨x, x'⟩^degree`.
    Polynomial { degree: u32 },
    Gaussian { sigma: f64 },
    /// Gaussian kernel with `exp(⟨x,x'⟩/σ²)` replaced by its degree-`order` Taylor polynomial.
    TruncatedGaussian { sigma: f64, order: u32 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree } if degree >= 1 => Ok(()),
            KernelSpec::Polynomial { .. } => Err(Error::invalid("polynomial degree must be >= 1")),
            KernelSpec::Gaussian { sigma } | KernelSpec::TruncatedGaussian { sigma, .. } => {
                if sigma.is_finite() && sigma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("sigma must be positive, got {sigma}")))
                }
            }
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Gaussian { sigma } | KernelSpec::TruncatedGaussian { sigma, .. } => {
                Some(sigma)
            }
            _ => None,
        }
    }

    /// True for the families with a finite explicit feature map.
    pub fn is_finite_dimensional(&self) -> bool {
        !matches!(self, KernelSpec::Gaussian { .. })
    }

    /// `K(x, x2)`.
    pub fn eval(&self, x: &[f64], x2: &[f64]) -> Result<f64> {
        eval_kernel(self, x, x2)
    }

    /// Kernel value without argument validation, for inner loops whose inputs
    /// were checked upstream.
    pub(crate) fn eval_unchecked(&self, x: &[f64], x2: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, x2),
            KernelSpec::Polynomial { degree } => dot(x, x2).powi(degree as i32),
            KernelSpec::Gaussian { sigma } => {
                let dist_sq: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
                (-dist_sq / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::TruncatedGaussian { sigma, order } => {
                let s2 = sigma * sigma;
                let z = dot(x, x2) / s2;
                let mut term = 1.0;
                let mut series = 1.0;
                for j in 1..=order {
                    term *= z / j as f64;
                    series += term;
                }
                let envelope = (-(dot(x, x) + dot(x2, x2)) / (2.0 * s2)).exp();
                envelope * series
            }
        }
    }
}

/// Evaluates `K(x, x2)` for the given kernel.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::invalid("input dimension must be >= 1"));
    }
    check_dim(x.len(), x2.len())?;
    check_finite(x, "kernel argument")?;
    check_finite(x2, "kernel argument")?;
    Ok(spec.eval_unchecked(x, x2))
}

/// Dimension of the explicit feature map for inputs in `ℝ^d`.
pub fn feature_dim(spec: &KernelSpec, d: usize) -> Result<usize> {
    use combinatorics::binomial;
    spec.validate()?;
    if d == 0 {
        return Err(Error::invalid("input dimension must be >= 1"));
    }
    let d = d as u64;
    let dim = match *spec {
        KernelSpec::Linear => Some(d),
        KernelSpec::Polynomial { degree } => binomial(d + degree as u64 - 1, degree as u64),
        KernelSpec::TruncatedGaussian { order, .. } => binomial(d + order as u64, order as u64),
        KernelSpec::Gaussian { .. } => return Err(Error::InfiniteDimensional),
    };
    dim.and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::invalid("feature dimension overflows"))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
