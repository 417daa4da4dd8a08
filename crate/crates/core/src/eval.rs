//! Risk and closeness metrics between a target and a learned hypothesis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::dot;
use crate::learner::perceptron_loss;
use crate::model::{DualModel, Hypothesis, Model};
use crate::rng::{rng, uniform_in_ball};
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub err_star: f64,
    pub err_hat: f64,
    /// `|err_star − err_hat|`.
    pub gap: f64,
    pub n_samples: usize,
    /// Mean of `|f*(x) − f̂(x)|` over the dataset inputs.
    pub pointwise_mean: f64,
    /// Max of `|f*(x) − f̂(x)|` over the dataset inputs.
    pub pointwise_sup: f64,
    pub sign_agreement: f64,
}

/// Mean perceptron loss over a dataset, summed in input order.
pub fn perceptron_risk<H: Hypothesis + ?Sized>(model: &H, data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("risk of an empty dataset"));
    }
    let mut total = 0.0;
    for s in data {
        total += perceptron_loss(model.decision_value(&s.x)?, s.y.value());
    }
    Ok(total / data.len() as f64)
}

pub fn risk_gap<A, B>(f_star: &A, f_hat: &B, data: &[Sample]) -> Result<RiskReport>
where
    A: Hypothesis + ?Sized,
    B: Hypothesis + ?Sized,
{
    if data.is_empty() {
        return Err(Error::invalid("risk of an empty dataset"));
    }
    let n = data.len() as f64;
    let (mut star, mut hat, mut diff_sum, mut sup) = (0.0, 0.0, 0.0, 0.0f64);
    let mut star_vals = Vec::with_capacity(data.len());
    let mut hat_vals = Vec::with_capacity(data.len());
    for s in data {
        let a = f_star.decision_value(&s.x)?;
        let b = f_hat.decision_value(&s.x)?;
        let y = s.y.value();
        star += perceptron_loss(a, y);
        hat += perceptron_loss(b, y);
        diff_sum += (a - b).abs();
        sup = sup.max((a - b).abs());
        star_vals.push(a);
        hat_vals.push(b);
    }
    let (err_star, err_hat) = (star / n, hat / n);
    let band = default_band(&star_vals);
    // Every input inside the band means f* vanishes on the data; agreement is vacuous.
    let sign_agreement = agreement(&star_vals, &hat_vals, band).unwrap_or(1.0);
    Ok(RiskReport {
        err_star,
        err_hat,
        gap: (err_star - err_hat).abs(),
        n_samples: data.len(),
        pointwise_mean: diff_sum / n,
        pointwise_sup: sup,
        sign_agreement,
    })
}

/// `max |f*(x) − f̂(x)|` over the probes.
pub fn pointwise_gap<A, B>(f_star: &A, f_hat: &B, probes: &[Vec<f64>]) -> Result<f64>
where
    A: Hypothesis + ?Sized,
    B: Hypothesis + ?Sized,
{
    let mut sup = 0.0f64;
    for x in probes {
        sup = sup.max((f_star.decision_value(x)? - f_hat.decision_value(x)?).abs());
    }
    Ok(sup)
}

/// Cosine of the angle between two hypotheses in their common feature space.
///
/// Two dual models with the same kernel are compared through the joint Gram
/// matrix of their centers; any other pairing goes through the explicit
/// feature map, which needs a finite-dimensional kernel.
pub fn direction_similarity(m1: &Model, m2: &Model) -> Result<f64> {
    if m1.spec() != m2.spec() {
        return Err(Error::invalid("models use different kernels"));
    }
    let (inner, n1, n2) = match (m1, m2) {
        (Model::Dual(a), Model::Dual(b)) => {
            (dual_inner(a, b), dual_inner(a, a), dual_inner(b, b))
        }
        _ => {
            let a = primal_coords(m1)?;
            let b = primal_coords(m2)?;
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: a.len(),
                    found: b.len(),
                });
            }
            (dot(&a, &b), dot(&a, &a), dot(&b, &b))
        }
    };
    if !(n1 > 0.0 && n2 > 0.0) {
        return Err(Error::invalid("direction of a zero-norm model"));
    }
    Ok(inner / (n1.sqrt() * n2.sqrt()))
}

fn dual_inner(a: &DualModel, b: &DualModel) -> f64 {
    let mut total = 0.0;
    for (ca, wa) in a.centers.iter().zip(&a.coefficients) {
        for (cb, wb) in b.centers.iter().zip(&b.coefficients) {
            total += wa * wb * a.spec.eval_unchecked(ca, cb);
        }
    }
    total
}

fn primal_coords(m: &Model) -> Result<Vec<f64>> {
    Ok(match m {
        Model::Primal(p) => p.coords().to_vec(),
        Model::Dual(d) => d.to_primal()?.coords().to_vec(),
    })
}

/// Fraction of probes outside `|m1(x)| ≤ band` where the two models agree in
/// sign.
pub fn sign_agreement<A, B>(m1: &A, m2: &B, probes: &[Vec<f64>], band: f64) -> Result<f64>
where
    A: Hypothesis + ?Sized,
    B: Hypothesis + ?Sized,
{
    if !(band >= 0.0) {
        return Err(Error::invalid("exclusion band must be non-negative"));
    }
    let a: Vec<f64> = probes.iter().map(|x| m1.decision_value(x)).collect::<Result<_>>()?;
    let b: Vec<f64> = probes.iter().map(|x| m2.decision_value(x)).collect::<Result<_>>()?;
    agreement(&a, &b, band)
}

/// `1e−6 · max |f|` over the given values.
pub fn default_band(values: &[f64]) -> f64 {
    1e-6 * values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn agreement(a: &[f64], b: &[f64], band: f64) -> Result<f64> {
    let (mut kept, mut same) = (0usize, 0usize);
    for (x, y) in a.iter().zip(b) {
        if x.abs() > band {
            kept += 1;
            if x.signum() == y.signum() && *y != 0.0 {
                same += 1;
            }
        }
    }
    if kept == 0 {
        return Err(Error::invalid("every probe falls inside the exclusion band"));
    }
    Ok(same as f64 / kept as f64)
}

/// `n` points drawn uniformly from the ball of radius `radius` in `ℝ^d`.
pub fn ball_probes(d: usize, radius: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng(seed);
    (0..n).map(|_| uniform_in_ball(&mut g, d, radius)).collect()
}

/// Regular `n × n` grid over `[lo, hi]²`.
pub fn grid_probes(lo: f64, hi: f64, n: usize) -> Vec<Vec<f64>> {
    let at = |i: usize| {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    (0..n)
        .flat_map(|i| (0..n).map(move |j| vec![at(i), at(j)]))
        .collect()
}
