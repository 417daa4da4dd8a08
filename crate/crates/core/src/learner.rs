//! Kernel perceptron learner.
//!
//! Minimizes the perceptron loss `Σ max(−yᵢ f(xᵢ), 0)` by projected
//! subgradient descent. Non-linear kernels are fitted in dual coordinates over
//! the distinct training inputs; the linear kernel is fitted in primal
//! coordinates. Subgradients are taken in the RKHS metric, so a dual step adds
//! `step · yᵢ` to the coefficient of every violated point.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernel::{dot, FeatureMap, KernelSpec};
use crate::linalg::{gram_matrix, Cholesky, Matrix};
use crate::model::{DualModel, Hypothesis, PrimalModel};
use crate::rng::rng;
use crate::sample::{Sample, TeachingSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `loss / ‖g‖²`, exact for a known optimal value of zero.
    Polyak,
    /// `c / √t` along the unit subgradient.
    InvSqrt,
    /// One epoch visits every violated sample in a shuffled order and takes
    /// that sample's own (over-relaxed) Polyak step `lossᵢ / ‖gᵢ‖²`.
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Standard normal coefficients drawn from the config seed.
    Random,
    /// Each center starts with the sum of its labels.
    Labels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub max_iters: usize,
    pub step_c: f64,
    pub loss_tol: f64,
    /// Iterates are rescaled into this RKHS-norm band after every step.
    pub norm_band: (f64, f64),
    /// Cap on `Σ|αⱼ|` of the normalized model. `None` means `10 ·` #centers.
    pub coeff_bound: Option<f64>,
    pub seed: u64,
    pub step_rule: StepRule,
    pub init: Init,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            max_iters: 20_000,
            step_c: 0.5,
            loss_tol: 1e-6,
            norm_band: (0.9, 1.1),
            coeff_bound: None,
            seed: 0,
            step_rule: StepRule::Cyclic,
            init: Init::Random,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.norm_band;
        if !(lo > 0.0 && lo <= 1.0 && 1.0 <= hi && hi.is_finite()) {
            return Err(Error::invalid("norm band must satisfy 0 < lo <= 1 <= hi"));
        }
        if let Some(b) = self.coeff_bound {
            if !(b > 0.0) {
                return Err(Error::invalid("coefficient bound must be positive"));
            }
        }
        if !(self.step_c > 0.0) {
            return Err(Error::invalid("step constant must be positive"));
        }
        if !(self.loss_tol >= 0.0) {
            return Err(Error::invalid("loss tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Result of a converged fit.
#[derive(Debug, Clone)]
pub struct Fit {
    /// Unit-norm model.
    pub model: DualModel,
    pub loss: f64,
    pub coefficient_l1: f64,
    pub iterations: usize,
    /// Best loss seen after each iteration; non-increasing.
    pub curve: Vec<f64>,
}

/// `Σ max(−yᵢ f(xᵢ), 0)` over the teaching set.
pub fn training_loss<H: Hypothesis + ?Sized>(model: &H, ts: &TeachingSet) -> Result<f64> {
    let mut total = 0.0;
    for it in &ts.items {
        total += perceptron_loss(model.decision_value(&it.x)?, it.y.value());
    }
    Ok(total)
}

pub(crate) fn perceptron_loss(f: f64, y: f64) -> f64 {
    (-y * f).max(0.0)
}

/// Fits a perceptron to a teaching set. Dual fits use the distinct teaching
/// points as centers.
///
/// Fails with [`Error::NotConverged`] if the loss stays above
/// `config.loss_tol`; the error carries the best model found.
pub fn fit(ts: &TeachingSet, spec: KernelSpec, config: &LearnerConfig) -> Result<Fit> {
    if ts.is_empty() {
        return Err(Error::invalid("cannot fit an empty teaching set"));
    }
    ts.validate()?;
    let samples = ts.samples();
    match spec {
        KernelSpec::Linear => fit_primal_linear(&samples, config),
        _ => fit_points(&samples, distinct_inputs(&samples), spec, config),
    }
}

/// Dual fit over explicit centers; every sample input must be a center.
pub fn fit_points(
    samples: &[Sample],
    centers: Vec<Vec<f64>>,
    spec: KernelSpec,
    config: &LearnerConfig,
) -> Result<Fit> {
    config.validate()?;
    spec.validate()?;
    if samples.is_empty() || centers.is_empty() {
        return Err(Error::invalid("fit needs samples and centers"));
    }
    let gram = gram_matrix(&spec, &centers)?.entries;
    let mut reps = Vec::with_capacity(samples.len());
    for s in samples {
        let j = centers
            .iter()
            .position(|c| *c == s.x)
            .ok_or_else(|| Error::invalid("every sample input must be a center"))?;
        reps.push(Rep::Unit(j));
    }
    let labels: Vec<f64> = samples.iter().map(|s| s.y.value()).collect();
    let bound = config.coeff_bound.unwrap_or(10.0 * centers.len() as f64);
    let twins = TwinProjector::new(&gram, samples, &centers);
    let problem = Problem {
        metric: gram,
        reps,
        labels,
        coeff_bound: Some(bound),
        twins,
    };
    let run = problem.solve(config)?;
    let model = DualModel::new(spec, centers, run.params)?;
    finish(model, run.loss, run.iterations, run.curve, config)
}

fn fit_primal_linear(samples: &[Sample], config: &LearnerConfig) -> Result<Fit> {
    config.validate()?;
    let d = samples[0].x.len();
    for s in samples {
        check_dim(d, s.x.len())?;
    }
    let problem = Problem {
        metric: Matrix::identity(d),
        reps: samples.iter().map(|s| Rep::Dense(s.x.clone())).collect(),
        labels: samples.iter().map(|s| s.y.value()).collect(),
        coeff_bound: None,
        twins: None,
    };
    let run = problem.solve(config)?;
    // θ·x is the linear kernel expanded at the single center θ.
    let model = DualModel::new(KernelSpec::Linear, vec![run.params], vec![1.0])?;
    finish(model, run.loss, run.iterations, run.curve, config)
}

fn finish(
    model: DualModel,
    loss: f64,
    iterations: usize,
    curve: Vec<f64>,
    config: &LearnerConfig,
) -> Result<Fit> {
    if loss > config.loss_tol {
        return Err(Error::NotConverged {
            model: Box::new(model),
            loss,
            iterations,
        });
    }
    Ok(Fit {
        coefficient_l1: model.coefficient_l1(),
        model,
        loss,
        iterations,
        curve,
    })
}

fn distinct_inputs(samples: &[Sample]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in samples {
        if !out.contains(&s.x) {
            out.push(s.x.clone());
        }
    }
    out
}

/// Representer of a training point in parameter space: `f(xᵢ) = repᵢᵀ M η`.
enum Rep {
    Unit(usize),
    Dense(Vec<f64>),
}

impl Rep {
    fn value(&self, m_eta: &[f64]) -> f64 {
        match self {
            Rep::Unit(j) => m_eta[*j],
            Rep::Dense(v) => dot(v, m_eta),
        }
    }

    fn add_to(&self, out: &mut [f64], scale: f64) {
        match self {
            Rep::Unit(j) => out[*j] += scale,
            Rep::Dense(v) => out.iter_mut().zip(v).for_each(|(o, x)| *o += scale * x),
        }
    }
}

/// Over-relaxation of the cyclic step; values in `(1, 2)` push a violated
/// inequality strictly past zero while equality pairs still contract.
const RELAXATION: f64 = 1.5;

struct Problem {
    metric: Matrix,
    reps: Vec<Rep>,
    labels: Vec<f64>,
    coeff_bound: Option<f64>,
    twins: Option<TwinProjector>,
}

/// RKHS projection onto `{f : f(z) = 0}` for every center `z` that carries
/// both labels. Any zero-loss hypothesis lies in this subspace.
struct TwinProjector {
    idx: Vec<usize>,
    sub: Matrix,
    chol: Cholesky,
}

impl TwinProjector {
    fn new(gram: &Matrix, samples: &[Sample], centers: &[Vec<f64>]) -> Option<Self> {
        let idx: Vec<usize> = centers
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let mut seen = [false; 2];
                for s in samples.iter().filter(|s| s.x == **c) {
                    seen[(s.y.value() > 0.0) as usize] = true;
                }
                seen[0] && seen[1]
            })
            .map(|(j, _)| j)
            .collect();
        if idx.is_empty() || idx.len() == centers.len() {
            return None;
        }
        let mut sub = Matrix::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub[(a, b)] = gram[(i, j)];
            }
        }
        match Cholesky::factor(&sub) {
            Ok(chol) => Some(TwinProjector { idx, sub, chol }),
            Err(e) => {
                log::debug!("twin projection disabled: {e}");
                None
            }
        }
    }

    /// Subtracts `Σ cⱼ K(zⱼ, ·)` with `Λ_ZZ c = f(Z)`.
    fn project(&self, metric: &Matrix, eta: &mut [f64]) {
        let m_eta = metric.mul_vec(eta);
        let rhs: Vec<f64> = self.idx.iter().map(|&j| m_eta[j]).collect();
        let c = self.chol.solve_refined(&self.sub, &rhs);
        for (&j, cj) in self.idx.iter().zip(&c) {
            eta[j] -= cj;
        }
    }
}

struct Run {
    params: Vec<f64>,
    loss: f64,
    iterations: usize,
    curve: Vec<f64>,
}

impl Problem {
    fn dim(&self) -> usize {
        self.metric.rows()
    }

    fn norm(&self, eta: &[f64]) -> f64 {
        self.metric.quadratic_form(eta).max(0.0).sqrt()
    }

    fn initial(&self, config: &LearnerConfig) -> Vec<f64> {
        let mut eta = vec![0.0; self.dim()];
        if config.init == Init::Labels {
            for (rep, y) in self.reps.iter().zip(&self.labels) {
                rep.add_to(&mut eta, *y);
            }
        }
        if !(self.norm(&eta) > 0.0) {
            let mut g = rng(config.seed);
            eta.iter_mut().for_each(|e| *e = g.sample(StandardNormal));
        }
        eta
    }

    /// Loss and the (negated) RKHS subgradient direction at `eta`.
    fn loss_and_direction(&self, eta: &[f64]) -> (f64, Vec<f64>) {
        let m_eta = self.metric.mul_vec(eta);
        let mut loss = 0.0;
        let mut dir = vec![0.0; self.dim()];
        for (rep, &y) in self.reps.iter().zip(&self.labels) {
            let l = perceptron_loss(rep.value(&m_eta), y);
            if l > 0.0 {
                loss += l;
                rep.add_to(&mut dir, y);
            }
        }
        (loss, dir)
    }

    /// Records `eta` as the best iterate if its normalized loss improves and
    /// it satisfies the coefficient bound.
    fn consider(&self, eta: &[f64], norm: f64, loss: f64, best: &mut Option<(f64, Vec<f64>)>) {
        let normalized_loss = loss / norm;
        let admissible = self
            .coeff_bound
            .is_none_or(|b| l1(eta) / norm <= b * (1.0 + 1e-12));
        if admissible && best.as_ref().is_none_or(|(l, _)| normalized_loss < *l) {
            *best = Some((normalized_loss, eta.iter().map(|e| e / norm).collect()));
        }
    }

    /// `M · gᵢ` for the subgradient direction `gᵢ` of sample `i`.
    fn image(&self, i: usize) -> Vec<f64> {
        match &self.reps[i] {
            Rep::Unit(j) => self.metric.row(*j).to_vec(),
            Rep::Dense(v) => self.metric.mul_vec(v),
        }
    }

    /// Sequential per-sample Polyak steps over a shuffled order. Returns
    /// `false` if no step could be taken.
    fn cyclic_epoch(&self, eta: &mut [f64], order: &mut [usize], g: &mut crate::rng::Rng) -> bool {
        order.shuffle(g);
        let mut m_eta = self.metric.mul_vec(eta);
        let mut moved = false;
        for &i in order.iter() {
            let y = self.labels[i];
            let l = perceptron_loss(self.reps[i].value(&m_eta), y);
            if l <= 0.0 {
                continue;
            }
            let img = self.image(i);
            let sq = self.reps[i].value(&img);
            if !(sq > 1e-300) {
                continue;
            }
            let step = RELAXATION * l / sq;
            self.reps[i].add_to(eta, step * y);
            m_eta.iter_mut().zip(&img).for_each(|(m, c)| *m += step * y * c);
            moved = true;
        }
        moved
    }

    fn solve(&self, config: &LearnerConfig) -> Result<Run> {
        let (lo, hi) = config.norm_band;
        let mut eta = self.initial(config);
        let mut order: Vec<usize> = (0..self.reps.len()).collect();
        let mut shuffler = rng(config.seed ^ 0x5eed_0f0f_a11c_e5e5);
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut curve = Vec::new();
        let mut iterations = 0;
        for t in 1..=config.max_iters.max(1) {
            iterations = t;
            let n = self.norm(&eta);
            if !(n > 0.0) || !n.is_finite() {
                break;
            }
            let (loss, dir) = self.loss_and_direction(&eta);
            self.consider(&eta, n, loss, &mut best);
            if let Some(tp) = &self.twins {
                let mut projected = eta.clone();
                tp.project(&self.metric, &mut projected);
                let pn = self.norm(&projected);
                if pn > 1e-9 * n {
                    let (pl, _) = self.loss_and_direction(&projected);
                    self.consider(&projected, pn, pl, &mut best);
                }
            }
            let best_loss = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            curve.push(best_loss);
            if best_loss <= config.loss_tol || loss == 0.0 {
                break;
            }
            if config.step_rule == StepRule::Cyclic {
                if !self.cyclic_epoch(&mut eta, &mut order, &mut shuffler) {
                    break;
                }
            } else {
                let dn = self.norm(&dir);
                if !(dn > 1e-300) {
                    break;
                }
                let step = match config.step_rule {
                    StepRule::InvSqrt => config.step_c / (t as f64).sqrt() / dn,
                    _ => loss / (dn * dn),
                };
                eta.iter_mut().zip(&dir).for_each(|(e, d)| *e += step * d);
            }

            let n = self.norm(&eta);
            if n > 0.0 && (n < lo || n > hi) {
                let target = n.clamp(lo, hi);
                eta.iter_mut().for_each(|e| *e *= target / n);
            }
            if let Some(b) = self.coeff_bound {
                let n = self.norm(&eta);
                if l1(&eta) > b * n {
                    eta = project_l1_ball(&eta, b * n);
                }
            }
        }
        let (loss, params) = best.ok_or_else(|| {
            Error::invalid("learner found no iterate satisfying the coefficient bound")
        })?;
        log::debug!("fit: loss {loss:e} after {iterations} iterations");
        Ok(Run {
            params,
            loss,
            iterations,
            curve,
        })
    }
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Euclidean projection onto `{v : ‖v‖₁ ≤ radius}` by soft thresholding.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    if l1(v) <= radius {
        return v.to_vec();
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - radius) / (i + 1) as f64;
        if ui > t {
            tau = t;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - tau).max(0.0))
        .collect()
}

/// Outcome of the exhaustive direction search.
#[derive(Debug, Clone)]
pub struct BruteForce {
    /// Unit-norm minimizing direction.
    pub model: PrimalModel,
    pub loss: f64,
}

/// Largest feature dimension the grid search accepts.
pub const BRUTE_FORCE_MAX_DIM: usize = 4;

/// Grid search over unit directions in feature space. The sphere is
/// parametrized by hyperspherical angles; the last angle takes `resolution`
/// steps over `[0, 2π)` and the others `resolution + 1` steps over `[0, π]`.
pub fn brute_force_fit(ts: &TeachingSet, spec: KernelSpec, resolution: usize) -> Result<BruteForce> {
    let d = ts
        .dim()
        .ok_or_else(|| Error::invalid("cannot fit an empty teaching set"))?;
    if resolution == 0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    let map = FeatureMap::new(spec, d)?;
    let dim = map.dim();
    if dim > BRUTE_FORCE_MAX_DIM {
        return Err(Error::invalid(format!(
            "brute force supports feature dimension <= {BRUTE_FORCE_MAX_DIM}, got {dim}"
        )));
    }
    let feats: Vec<(Vec<f64>, f64)> = ts
        .items
        .iter()
        .map(|it| Ok((map.apply(&it.x)?.coords, it.y.value())))
        .collect::<Result<_>>()?;
    let loss_of = |u: &[f64]| -> f64 {
        feats
            .iter()
            .map(|(phi, y)| perceptron_loss(dot(u, phi), *y))
            .sum()
    };

    let mut best = (f64::INFINITY, vec![0.0; dim]);
    let mut consider = |u: Vec<f64>| {
        let l = loss_of(&u);
        if l < best.0 {
            best = (l, u);
        }
    };
    if dim == 1 {
        consider(vec![1.0]);
        consider(vec![-1.0]);
    } else {
        let polar = dim - 2;
        let mut idx = vec![0usize; polar];
        let azimuth: Vec<f64> = (0..resolution)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / resolution as f64)
            .collect();
        loop {
            let angles: Vec<f64> = idx
                .iter()
                .map(|&i| std::f64::consts::PI * i as f64 / resolution as f64)
                .collect();
            for &phi in &azimuth {
                consider(spherical(&angles, phi));
            }
            // Odometer over the polar angles.
            let mut k = 0;
            while k < polar {
                idx[k] += 1;
                if idx[k] <= resolution {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == polar {
                break;
            }
        }
    }
    let model = PrimalModel::from_map(map, best.1)?;
    Ok(BruteForce {
        model,
        loss: best.0,
    })
}

fn spherical(polar: &[f64], azimuth: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(polar.len() + 2);
    let mut sin_prod = 1.0;
    for &a in polar {
        out.push(sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    out.push(sin_prod * azimuth.cos());
    out.push(sin_prod * azimuth.sin());
    out
}
