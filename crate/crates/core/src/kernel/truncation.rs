use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use super::combinatorics::{binomial, ln_factorial};
use crate::error::{Error, Result};

/// Approximation parameters for teaching a Gaussian perceptron.
///
/// `radius` is `R = max(ln²(1/ε)/e², d)`, the squared input radius measured in
/// units of `σ²`; `order` is the Taylor truncation `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub epsilon: f64,
    pub radius: f64,
    pub order: u32,
    /// `ε / (√d)^s`.
    pub epsilon_s: f64,
    pub dim: usize,
    /// Teaching points are drawn from the ball of radius `factor · √R · σ`.
    pub ball_radius_factor: f64,
    /// Anchor leakage limit is `anchor_q · ε`.
    pub anchor_q: f64,
    /// Coherence bound `1 / (2(r − 1))` for `r = C(d + s, s)`.
    pub coherence_target: f64,
}

pub const DEFAULT_BALL_FACTOR: f64 = 16.0;
pub const DEFAULT_ANCHOR_Q: f64 = 9.0;

impl ApproxConfig {
    /// Builds a config for a caller-chosen truncation order. `R` is still
    /// derived from `ε` and `d`; the tail-bound postcondition is not enforced.
    pub fn with_order(epsilon: f64, dim: usize, order: u32) -> Result<Self> {
        validate(epsilon, dim)?;
        let radius = radius_for(epsilon, dim);
        let r = binomial(dim as u64 + order as u64, order as u64)
            .ok_or_else(|| Error::invalid("truncated feature dimension overflows"))?;
        let coherence_target = if r > 1 {
            1.0 / (2.0 * (r - 1) as f64)
        } else {
            f64::INFINITY
        };
        Ok(ApproxConfig {
            epsilon,
            radius,
            order,
            epsilon_s: epsilon / (dim as f64).sqrt().powi(order as i32),
            dim,
            ball_radius_factor: DEFAULT_BALL_FACTOR,
            anchor_q: DEFAULT_ANCHOR_Q,
            coherence_target,
        })
    }

    /// `r = C(d + s, s)`, the truncated feature dimension.
    pub fn feature_dim(&self) -> usize {
        binomial(self.dim as u64 + self.order as u64, self.order as u64).unwrap() as usize
    }

    /// Radius of the ball teaching points are drawn from.
    pub fn teaching_radius(&self, sigma: f64) -> f64 {
        self.ball_radius_factor * self.radius.sqrt() * sigma
    }

    /// Radius of the input space, `‖x‖²/σ² ≤ 2√R`.
    pub fn input_radius(&self, sigma: f64) -> f64 {
        sigma * (2.0 * self.radius.sqrt()).sqrt()
    }

    /// `R^{s+1} / (s+1)!`, the tail bound at the edge of the `R` ball.
    pub fn tail_at_radius(&self) -> f64 {
        ln_tail(self.radius, self.order).exp()
    }
}

fn validate(epsilon: f64, dim: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if dim == 0 {
        return Err(Error::invalid("input dimension must be >= 1"));
    }
    Ok(())
}

fn radius_for(epsilon: f64, dim: usize) -> f64 {
    let l = (1.0 / epsilon).ln();
    (l * l / (E * E)).max(dim as f64)
}

/// `ln(p^{s+1} / (s+1)!)`
fn ln_tail(p: f64, s: u32) -> f64 {
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    (s as f64 + 1.0) * p.ln() - ln_factorial(s as u64 + 1)
}

/// Picks the truncation order for a target accuracy `ε` in dimension `d`:
/// `s = ⌈e²·R⌉`, raised until `R^{s+1}/(s+1)! ≤ ε`.
pub fn choose_truncation(epsilon: f64, d: usize) -> Result<ApproxConfig> {
    validate(epsilon, d)?;
    let radius = radius_for(epsilon, d);
    let mut s = (E * E * radius).ceil() as u32;
    while ln_tail(radius, s) > epsilon.ln() {
        s += 1;
    }
    ApproxConfig::with_order(epsilon, d, s)
}

/// Upper bound `(‖x‖·‖x'‖/σ²)^{s+1} / (s+1)!` on the Taylor truncation error
/// of the Gaussian kernel, evaluated in log-space.
pub fn taylor_tail_bound(norm_x: f64, norm_x2: f64, sigma: f64, s: u32) -> Result<f64> {
    if !(norm_x >= 0.0 && norm_x2 >= 0.0) || !norm_x.is_finite() || !norm_x2.is_finite() {
        return Err(Error::invalid("norms must be finite and non-negative"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma must be positive"));
    }
    Ok(ln_tail(norm_x * norm_x2 / (sigma * sigma), s).exp())
}
