use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::combinatorics::{ln_factorial, ln_factorial_product};
use super::{feature_dim, KernelSpec};
use crate::error::{check_dim, check_finite, Error, Result};

/// Exponent vector `λ` of a monomial `x^λ = ∏ xᵢ^λᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// `|λ| = Σ λᵢ`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&l, _)| l > 0)
            .map(|(&l, &xi)| xi.powi(l as i32))
            .product()
    }
}

/// All multi-indices of length `d` with `|λ| = order`, lexicographically descending.
pub fn multi_indices(d: usize, order: u32) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::invalid("multi-index length must be >= 1"));
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    fill(&mut current, 0, order, &mut out);
    Ok(out)
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        fill(current, pos + 1, remaining - first, out);
    }
    current[pos] = 0;
}

/// Coordinate layout of an explicit feature map: position `i` holds the
/// monomial `entries[i]`, in graded order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLayout {
    input_dim: usize,
    entries: Vec<MultiIndex>,
}

impl FeatureLayout {
    fn graded(input_dim: usize, orders: impl Iterator<Item = u32>) -> Result<Self> {
        let mut entries = Vec::new();
        for k in orders {
            entries.extend(multi_indices(input_dim, k)?);
        }
        Ok(FeatureLayout { input_dim, entries })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(order, λ)` for the coordinate at `pos`.
    pub fn index(&self, pos: usize) -> Option<(u32, &MultiIndex)> {
        self.entries.get(pos).map(|m| (m.order(), m))
    }

    /// Position of a multi-index, if it is part of the layout.
    pub fn position(&self, lambda: &[u32]) -> Option<usize> {
        self.entries.iter().position(|m| m.0 == lambda)
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }
}

/// A point in an explicit feature space together with its coordinate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub coords: Vec<f64>,
    pub layout: Arc<FeatureLayout>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        super::dot(&self.coords, &other.coords)
    }

    pub fn norm(&self) -> f64 {
        super::norm(&self.coords)
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

#[derive(Debug, Clone, Copy)]
enum Envelope {
    None,
    /// Multiply every coordinate by `exp(-||x||² / (2σ²))`.
    Gaussian { sigma: f64 },
}

/// Explicit feature map `Φ` of a finite-dimensional kernel on `ℝ^d`,
/// with the per-coordinate constants precomputed.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    spec: KernelSpec,
    layout: Arc<FeatureLayout>,
    scales: Vec<f64>,
    envelope: Envelope,
}

impl FeatureMap {
    pub fn new(spec: KernelSpec, input_dim: usize) -> Result<Self> {
        // Validates the spec and rejects the infinite-dimensional family.
        let dim = feature_dim(&spec, input_dim)?;
        let (layout, scales, envelope) = match spec {
            KernelSpec::Linear => {
                let layout = FeatureLayout::graded(input_dim, std::iter::once(1))?;
                let scales = vec![1.0; layout.len()];
                (layout, scales, Envelope::None)
            }
            KernelSpec::Polynomial { degree } => {
                let layout = FeatureLayout::graded(input_dim, std::iter::once(degree))?;
                // √(k! / ∏ λᵢ!)
                let lnk = ln_factorial(degree as u64);
                let scales = layout
                    .entries
                    .iter()
                    .map(|m| (0.5 * (lnk - ln_factorial_product(&m.0))).exp())
                    .collect();
                (layout, scales, Envelope::None)
            }
            KernelSpec::TruncatedGaussian { sigma, order } => {
                let layout = FeatureLayout::graded(input_dim, 0..=order)?;
                // √(C^k_λ) / (√(k!) σ^k) = 1 / (σ^k √(∏ λᵢ!))
                let ln_sigma = sigma.ln();
                let scales = layout
                    .entries
                    .iter()
                    .map(|m| {
                        (-(m.order() as f64) * ln_sigma - 0.5 * ln_factorial_product(&m.0)).exp()
                    })
                    .collect();
                (layout, scales, Envelope::Gaussian { sigma })
            }
            KernelSpec::Gaussian { .. } => unreachable!("rejected by feature_dim"),
        };
        debug_assert_eq!(layout.len(), dim);
        Ok(FeatureMap {
            spec,
            layout: Arc::new(layout),
            scales,
            envelope,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.layout.input_dim
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn layout(&self) -> &Arc<FeatureLayout> {
        &self.layout
    }

    /// `Φ(x)`.
    pub fn apply(&self, x: &[f64]) -> Result<FeatureVector> {
        check_dim(self.input_dim(), x.len())?;
        check_finite(x, "feature map argument")?;
        let mut coords = vec![0.0; self.dim()];
        self.apply_into(x, &mut coords);
        Ok(FeatureVector {
            coords,
            layout: Arc::clone(&self.layout),
        })
    }

    /// Writes `Φ(x)` into `out` without validating the arguments.
    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let prefactor = match self.envelope {
            Envelope::None => 1.0,
            Envelope::Gaussian { sigma } => (-super::dot(x, x) / (2.0 * sigma * sigma)).exp(),
        };
        for ((o, m), scale) in out.iter_mut().zip(&self.layout.entries).zip(&self.scales) {
            *o = prefactor * scale * m.monomial(x);
        }
    }

    /// `θ · Φ(x)` for a coefficient vector in this feature space.
    pub(crate) fn dot_unchecked(&self, theta: &[f64], x: &[f64]) -> f64 {
        let prefactor = match self.envelope {
            Envelope::None => 1.0,
            Envelope::Gaussian { sigma } => (-super::dot(x, x) / (2.0 * sigma * sigma)).exp(),
        };
        let poly: f64 = theta
            .iter()
            .zip(&self.layout.entries)
            .zip(&self.scales)
            .map(|((t, m), s)| t * s * m.monomial(x))
            .sum();
        prefactor * poly
    }
}

/// Explicit homogeneous-polynomial feature map of degree `k` on `ℝ^d`.
pub fn poly_feature_map(d: usize, k: u32, x: &[f64]) -> Result<FeatureVector> {
    FeatureMap::new(KernelSpec::Polynomial { degree: k }, d)?.apply(x)
}

/// Explicit feature map of the order-`s` Taylor-truncated Gaussian kernel on `ℝ^d`.
pub fn truncated_gaussian_feature_map(
    d: usize,
    sigma: f64,
    s: u32,
    x: &[f64],
) -> Result<FeatureVector> {
    FeatureMap::new(KernelSpec::TruncatedGaussian { sigma, order: s }, d)?.apply(x)
}
