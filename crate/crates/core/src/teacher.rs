//! Teaching-set constructors.
//!
//! Exact sets for linear and polynomial perceptrons, ε-approximate sets for
//! Gaussian perceptrons, the assumption checker and the closed-form dual
//! certificate for a constructed Gaussian set.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kernel::{
    choose_truncation, dot, norm, ApproxConfig, FeatureMap, KernelSpec, DEFAULT_ANCHOR_Q,
    DEFAULT_BALL_FACTOR,
};
use crate::linalg::{
    extend_orthogonal_basis, gram_matrix, select_pivoted, solve_positive_definite, Cholesky,
    IndependentSet, Solve,
};
use crate::model::{DualModel, PrimalModel};
use crate::rng::{derive_seed, rng, uniform_in_ball};
use crate::sample::{Label, Tag, TeachingItem, TeachingSet};

/// Builds the `d + 1` point set that pins down a linear separator: an
/// orthonormal basis of `θ*⊥`, the negated sum of that basis, and `θ*`, all
/// labeled `+1`. For `d = 1` only `θ*` is emitted.
pub fn linear_teaching_set(theta_star: &[f64]) -> Result<TeachingSet> {
    let basis = extend_orthogonal_basis(theta_star)?;
    let mut items: Vec<TeachingItem> = basis
        .iter()
        .map(|v| TeachingItem {
            x: v.clone(),
            y: Label::Positive,
            tag: Tag::Basis,
        })
        .collect();
    if !basis.is_empty() {
        let mut opposite = vec![0.0; theta_star.len()];
        for v in &basis {
            opposite.iter_mut().zip(v).for_each(|(o, x)| *o -= x);
        }
        items.push(TeachingItem {
            x: opposite,
            y: Label::Positive,
            tag: Tag::OppositeSum,
        });
    }
    items.push(TeachingItem {
        x: theta_star.to_vec(),
        y: Label::Positive,
        tag: Tag::Anchor,
    });
    TeachingSet::new(items)
}

/// Parameters of the randomized zero-contour sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Chord endpoints are drawn uniformly from this ball around the origin.
    pub ball_radius: f64,
    /// Accepted roots satisfy `|f(z)| ≤ root_tol · max |f|` at the chord ends.
    pub root_tol: f64,
    /// Residual a unit-normalized feature image must keep after projecting out
    /// the images already accepted.
    pub pivot_tol: f64,
    /// Number of chords to try.
    pub budget: usize,
    /// Minimum distance between accepted roots.
    pub min_separation: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            ball_radius: 1.0,
            root_tol: 1e-10,
            pivot_tol: 1e-8,
            budget: 100_000,
            min_separation: 0.0,
        }
    }
}

/// Roots pooled per requested boundary point before each row reduction.
const POOL_FACTOR: usize = 8;

/// Samples `count` roots of `f(x) = θ·Φ(x)` whose feature images are
/// linearly independent.
///
/// Roots come from bisecting random chords with a sign change and are pooled;
/// the pool is then row-reduced with pivoting (see [`select_pivoted`]) on the
/// unit-normalized feature images. The pool doubles until `count` roots
/// survive or the chord budget is spent.
pub fn polynomial_boundary_points(
    theta: &PrimalModel,
    count: usize,
    seed: u64,
    search: &SearchConfig,
) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(search.ball_radius > 0.0 && search.root_tol > 0.0 && search.pivot_tol > 0.0) {
        return Err(Error::invalid("search radius and tolerances must be positive"));
    }
    let map = theta.feature_map();
    let d = map.input_dim();
    let coords = theta.coords();
    let f = |x: &[f64]| map.dot_unchecked(coords, x);
    let homogeneous = matches!(theta.spec(), KernelSpec::Polynomial { .. } | KernelSpec::Linear);
    let to_sphere = |x: &[f64]| -> Vec<f64> {
        let n = norm(x);
        if n > 0.0 {
            x.iter().map(|v| v * search.ball_radius / n).collect()
        } else {
            x.to_vec()
        }
    };

    let mut g = rng(seed);
    let mut pool: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    let mut chords = 0;
    let mut target = POOL_FACTOR.saturating_mul(count);
    loop {
        while pool.len() < target && chords < search.budget {
            chords += 1;
            let mut p = uniform_in_ball(&mut g, d, search.ball_radius);
            let mut q = uniform_in_ball(&mut g, d, search.ball_radius);
            if homogeneous {
                // Roots of a homogeneous target are closed under scaling; short
                // roots have tiny images and blow up the dual coefficients, so
                // search along the sphere instead.
                p = to_sphere(&p);
                q = to_sphere(&q);
            }
            let on_sphere = |x: &[f64]| if homogeneous { f(&to_sphere(x)) } else { f(x) };
            let (fp, fq) = (on_sphere(&p), on_sphere(&q));
            if !(fp * fq < 0.0) {
                continue;
            }
            let tol = search.root_tol * fp.abs().max(fq.abs());
            let Some(mut z) = bisect(on_sphere, &p, &q, fp, tol) else {
                continue;
            };
            if homogeneous {
                z = to_sphere(&z);
            }
            if search.min_separation > 0.0
                && pool.iter().any(|y| distance(y, &z) < search.min_separation)
            {
                continue;
            }
            let mut phi = vec![0.0; map.dim()];
            map.apply_into(&z, &mut phi);
            let n = norm(&phi);
            if !(n > f64::MIN_POSITIVE) {
                continue;
            }
            phi.iter_mut().for_each(|v| *v /= n);
            pool.push(z);
            images.push(phi);
        }
        if !pool.is_empty() {
            chosen = select_pivoted(&images, count, search.pivot_tol);
        }
        if chosen.len() == count || chords >= search.budget {
            break;
        }
        target = target.saturating_mul(2);
    }
    let points: Vec<Vec<f64>> = chosen.iter().map(|&i| pool[i].clone()).collect();
    if points.len() == count {
        return Ok(points);
    }
    Err(Error::BoundarySearch {
        achieved: points.len(),
        requested: count,
        points,
    })
}

fn bisect(f: impl Fn(&[f64]) -> f64, p: &[f64], q: &[f64], fp: f64, tol: f64) -> Option<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect() };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let lo_sign = fp.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let x = at(mid);
        let fm = f(&x);
        if fm.abs() <= tol {
            return Some(x);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * 0.5 {
            break;
        }
    }
    None
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Diagnostics for the assumptions behind approximate teaching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `r − 1` for an `r`-dimensional feature space.
    pub requested_rank: usize,
    /// Rank of the feature images of the boundary (or basis) points.
    pub achieved_rank: usize,
    /// Largest `|⟨φᵢ, φⱼ⟩|` over distinct unit-normalized images.
    pub max_coherence: f64,
    /// `1 / (2(r − 1))`.
    pub coherence_bound: f64,
    /// Smallest `y · θ·Φ(a)` over anchors; `None` without anchors.
    pub anchor_margin: Option<f64>,
    /// Largest Gaussian `K(a, zᵢ)`; only for Gaussian families.
    pub anchor_leakage: Option<f64>,
    /// `Q · ε` when an approximation config was supplied.
    pub leakage_bound: Option<f64>,
    pub assumption1_ok: bool,
    pub smoothness_ok: bool,
    pub anchor_ok: bool,
}

/// Re-ranks a teaching set against the target it was built for.
pub fn check_assumptions(
    ts: &TeachingSet,
    theta: &PrimalModel,
    config: Option<&ApproxConfig>,
) -> Result<AssumptionReport> {
    let map = theta.feature_map();
    let r = map.dim();
    let requested_rank = r.saturating_sub(1);
    let complement = ts.complement_points();

    let mut images = Vec::with_capacity(complement.len());
    for z in &complement {
        check_dim(map.input_dim(), z.len())?;
        let mut phi = map.apply(z)?.coords;
        let n = norm(&phi);
        if n > 0.0 {
            phi.iter_mut().for_each(|v| *v /= n);
        }
        images.push(phi);
    }
    let mut independent = IndependentSet::new(1e-8);
    let achieved_rank = images
        .iter()
        .filter(|phi| independent.try_push(phi))
        .count()
        .min(requested_rank);
    let mut max_coherence = 0.0f64;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            max_coherence = max_coherence.max(dot(&images[i], &images[j]).abs());
        }
    }
    let coherence_bound = if requested_rank > 0 {
        1.0 / (2.0 * requested_rank as f64)
    } else {
        f64::INFINITY
    };

    let anchors = ts.anchors();
    let mut anchor_margin: Option<f64> = None;
    let mut anchor_leakage: Option<f64> = None;
    let gaussian = theta.spec().sigma().map(|sigma| KernelSpec::Gaussian { sigma });
    for (a, y) in &anchors {
        check_dim(map.input_dim(), a.len())?;
        let m = y.value() * map.dot_unchecked(theta.coords(), a);
        anchor_margin = Some(anchor_margin.map_or(m, |v| v.min(m)));
        if let Some(k) = &gaussian {
            for z in &complement {
                let leak = k.eval_unchecked(a, z);
                anchor_leakage = Some(anchor_leakage.map_or(leak, |v| v.max(leak)));
            }
        }
    }
    let leakage_bound = config.map(|c| c.anchor_q * c.epsilon);
    let leakage_ok = match (anchor_leakage, leakage_bound) {
        (Some(l), Some(b)) => l <= b,
        _ => true,
    };
    Ok(AssumptionReport {
        requested_rank,
        achieved_rank,
        max_coherence,
        coherence_bound,
        anchor_margin,
        anchor_leakage,
        leakage_bound,
        assumption1_ok: achieved_rank == requested_rank,
        smoothness_ok: max_coherence <= coherence_bound,
        anchor_ok: anchor_margin.is_some_and(|m| m > 0.0) && leakage_ok,
    })
}

/// Builds the `2(r − 1) + 1` point exact teaching set for a homogeneous
/// polynomial target `θ̃`, with `r` the feature dimension.
pub fn polynomial_teaching_set(
    theta: &PrimalModel,
    seed: u64,
    search: &SearchConfig,
) -> Result<(TeachingSet, AssumptionReport)> {
    if !matches!(theta.spec(), KernelSpec::Polynomial { .. }) {
        return Err(Error::invalid("polynomial teaching needs a polynomial-kernel target"));
    }
    if !(theta.norm() > 0.0) {
        return Err(Error::invalid("target must be nonzero"));
    }
    let theta = theta.normalized()?;
    let r = theta.feature_map().dim();
    let boundary = polynomial_boundary_points(&theta, r - 1, derive_seed(seed, &[1]), search)?;
    let anchor = best_margin_point(&theta, search.ball_radius, 4096, derive_seed(seed, &[2]))
        .ok_or_else(|| Error::AnchorSearch("target is non-positive on every sample".into()))?;
    let ts = TeachingSet::from_boundary(&boundary, &[(anchor, Label::Positive)])?;
    let report = check_assumptions(&ts, &theta, None)?;
    Ok((ts, report))
}

/// Sample from the ball with the largest `θ·Φ(x) / ‖Φ(x)‖`, if positive.
fn best_margin_point(theta: &PrimalModel, radius: f64, samples: usize, seed: u64) -> Option<Vec<f64>> {
    let map = theta.feature_map();
    let mut g = rng(seed);
    let mut phi = vec![0.0; map.dim()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..samples {
        let x = uniform_in_ball(&mut g, map.input_dim(), radius);
        map.apply_into(&x, &mut phi);
        let n = norm(&phi);
        if !(n > 0.0) {
            continue;
        }
        let m = dot(theta.coords(), &phi) / n;
        if m > 0.0 && best.as_ref().is_none_or(|(b, _)| m > *b) {
            best = Some((m, x));
        }
    }
    let homogeneous = matches!(theta.spec(), KernelSpec::Polynomial { .. });
    best.map(|(_, x)| {
        let xn = norm(&x);
        if homogeneous && xn > 0.0 {
            x.iter().map(|v| v * radius / xn).collect()
        } else {
            x
        }
    })
}

/// The target `Σᵢ Φ(eᵢ)/√d`, which is strictly positive off the origin for
/// even `k` and so has no boundary to teach.
pub fn counterexample_target(d: usize, k: u32) -> Result<PrimalModel> {
    let map = FeatureMap::new(KernelSpec::Polynomial { degree: k }, d)?;
    let mut theta = vec![0.0; map.dim()];
    let mut e = vec![0.0; d];
    for i in 0..d {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[i] = 1.0;
        let phi = map.apply(&e)?;
        theta
            .iter_mut()
            .zip(phi.as_ref())
            .for_each(|(t, p)| *t += p / (d as f64).sqrt());
    }
    PrimalModel::new(*map.spec(), d, theta)
}

/// How many anchors a Gaussian teaching set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RConvention {
    /// `r − 1` boundary pairs and one positive anchor: `2(r − 1) + 1` items.
    #[default]
    Main,
    /// `r − 1` boundary pairs and two one-sided anchors, `+1` and `−1`:
    /// `2(r − 1) + 2` items.
    Appendix,
}

impl RConvention {
    pub fn set_size(self, r: usize) -> usize {
        match self {
            RConvention::Main => 2 * (r - 1) + 1,
            RConvention::Appendix => 2 * (r - 1) + 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTeachConfig {
    pub epsilon: f64,
    /// Fixed truncation order; otherwise chosen from `ε`.
    pub order: Option<u32>,
    pub convention: RConvention,
    pub ball_factor: f64,
    pub anchor_q: f64,
    /// Anchors need at least this fraction of the best sampled margin.
    pub margin_frac: f64,
    pub anchor_budget: usize,
    /// Sampler settings; `ball_radius` is replaced by the teaching radius.
    pub search: SearchConfig,
}

impl Default for GaussianTeachConfig {
    fn default() -> Self {
        GaussianTeachConfig {
            epsilon: 0.1,
            order: None,
            convention: RConvention::Main,
            ball_factor: DEFAULT_BALL_FACTOR,
            anchor_q: DEFAULT_ANCHOR_Q,
            margin_frac: 0.5,
            anchor_budget: 100_000,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianTeaching {
    pub set: TeachingSet,
    pub config: ApproxConfig,
    pub report: AssumptionReport,
    /// Unit-norm projection of the target onto the truncated feature space.
    pub theta_tilde: PrimalModel,
}

/// Projects a Gaussian dual model onto the truncated feature space of order
/// `s`: `θ̃ = Σ αⱼ Φ̃(cⱼ)`.
pub fn project_to_truncated(theta_star: &DualModel, order: u32) -> Result<PrimalModel> {
    let sigma = match theta_star.spec {
        KernelSpec::Gaussian { sigma } | KernelSpec::TruncatedGaussian { sigma, .. } => sigma,
        _ => return Err(Error::invalid("target must use a Gaussian kernel")),
    };
    DualModel {
        spec: KernelSpec::TruncatedGaussian { sigma, order },
        centers: theta_star.centers.clone(),
        coefficients: theta_star.coefficients.clone(),
    }
    .to_primal()
}

/// Builds an ε-approximate teaching set for a Gaussian perceptron target.
pub fn gaussian_teaching_set(
    theta_star: &DualModel,
    cfg: &GaussianTeachConfig,
    seed: u64,
) -> Result<GaussianTeaching> {
    let KernelSpec::Gaussian { sigma } = theta_star.spec else {
        return Err(Error::invalid("target must use the Gaussian kernel"));
    };
    if !(cfg.ball_factor > 0.0 && cfg.anchor_q > 0.0) {
        return Err(Error::invalid("ball factor and anchor constant must be positive"));
    }
    if !(cfg.margin_frac >= 0.0 && cfg.margin_frac <= 1.0) {
        return Err(Error::invalid("margin fraction must lie in [0, 1]"));
    }
    let d = theta_star.centers[0].len();
    let mut approx = match cfg.order {
        Some(s) => ApproxConfig::with_order(cfg.epsilon, d, s)?,
        None => choose_truncation(cfg.epsilon, d)?,
    };
    approx.ball_radius_factor = cfg.ball_factor;
    approx.anchor_q = cfg.anchor_q;

    let theta = project_to_truncated(theta_star, approx.order)?;
    if !(theta.norm() > 0.0) {
        return Err(Error::invalid("target projects to zero"));
    }
    let theta = theta.normalized()?;
    let r = approx.feature_dim();
    let radius = approx.teaching_radius(sigma);
    let search = SearchConfig {
        ball_radius: radius,
        ..cfg.search
    };
    let boundary = polynomial_boundary_points(&theta, r - 1, derive_seed(seed, &[1]), &search)?;
    let limit = approx.anchor_q * approx.epsilon;
    let alignment = Alignment::new(theta_star, &boundary);
    let pick = |label: Label, tag: u64| {
        pick_anchor(&theta, &boundary, alignment.as_ref(), label, radius, limit, cfg, derive_seed(seed, &[tag]))
    };
    let mut anchors = vec![(pick(Label::Positive, 2)?, Label::Positive)];
    if cfg.convention == RConvention::Appendix {
        anchors.push((pick(Label::Negative, 3)?, Label::Negative));
    }
    let set = TeachingSet::from_boundary(&boundary, &anchors)?;
    let report = check_assumptions(&set, &theta, Some(&approx))?;
    log::debug!(
        "gaussian teaching set: s={} r={} size={} coherence={:.3} leakage={:?}",
        approx.order,
        r,
        set.len(),
        report.max_coherence,
        report.anchor_leakage
    );
    Ok(GaussianTeaching {
        set,
        config: approx,
        report,
        theta_tilde: theta,
    })
}

/// Scores candidate anchors by how well the resulting certificate lines up
/// with the target: the certificate for anchor `a` is the part of `K(a, ·)`
/// orthogonal to every `K(zᵢ, ·)`, so its cosine with `f*` has a closed form.
struct Alignment<'a> {
    target: &'a DualModel,
    boundary: &'a [Vec<f64>],
    gram: Cholesky,
    /// `Λ⁻¹ f*(Z)`.
    weights: Vec<f64>,
    target_norm: f64,
}

impl<'a> Alignment<'a> {
    fn new(target: &'a DualModel, boundary: &'a [Vec<f64>]) -> Option<Self> {
        let gram = gram_matrix(&target.spec, boundary).ok()?;
        let chol = Cholesky::factor(&gram.entries).ok()?;
        let values: Vec<f64> = boundary.iter().map(|z| target.eval_unchecked(z)).collect();
        let weights = chol.solve_refined(&gram.entries, &values);
        let target_norm = target.rkhs_norm().ok().filter(|n| *n > 0.0)?;
        Some(Alignment {
            target,
            boundary,
            gram: chol,
            weights,
            target_norm,
        })
    }

    /// `y · cos(f̂_a, f*)` in the Gaussian RKHS.
    fn score(&self, a: &[f64], y: f64) -> f64 {
        let k: Vec<f64> = self
            .boundary
            .iter()
            .map(|z| self.target.spec.eval_unchecked(a, z))
            .collect();
        let u = self.gram.solve(&k);
        let residual_sq = 1.0 - dot(&k, &u);
        if !(residual_sq > 0.0) {
            return f64::NEG_INFINITY;
        }
        let inner = self.target.eval_unchecked(a) - dot(&k, &self.weights);
        y * inner / (residual_sq.sqrt() * self.target_norm)
    }
}

/// Rejection-samples an anchor with `y·f̃(a) ≥ margin_frac · (best sampled
/// margin)` and Gaussian leakage `max K(a, zᵢ) ≤ limit`. A pilot batch fixes
/// the best margin; among admissible pilot points the one whose certificate
/// best aligns with the target wins (largest margin without a target score),
/// otherwise the first admissible later sample.
#[allow(clippy::too_many_arguments)]
fn pick_anchor(
    theta: &PrimalModel,
    boundary: &[Vec<f64>],
    alignment: Option<&Alignment>,
    label: Label,
    radius: f64,
    limit: f64,
    cfg: &GaussianTeachConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    const PILOT: usize = 4096;
    let map = theta.feature_map();
    let sigma = theta.spec().sigma().unwrap_or(1.0);
    let gaussian = KernelSpec::Gaussian { sigma };
    let d = map.input_dim();
    let y = label.value();
    let mut g = rng(seed);
    let margin = |x: &[f64]| y * map.dot_unchecked(theta.coords(), x);
    let leakage = |x: &[f64]| {
        boundary
            .iter()
            .map(|z| gaussian.eval_unchecked(x, z))
            .fold(0.0f64, f64::max)
    };

    let pilot: Vec<(Vec<f64>, f64)> = (0..PILOT.min(cfg.anchor_budget.max(1)))
        .map(|_| {
            let x = uniform_in_ball(&mut g, d, radius);
            let m = margin(&x);
            (x, m)
        })
        .collect();
    let best = pilot.iter().map(|(_, m)| *m).fold(f64::NEG_INFINITY, f64::max);
    if !(best > 0.0) {
        return Err(Error::AnchorSearch(format!(
            "no sampled point has {} margin",
            if y > 0.0 { "positive" } else { "negative" }
        )));
    }
    let threshold = cfg.margin_frac * best;
    let mut chosen: Option<(f64, &Vec<f64>)> = None;
    for (x, m) in &pilot {
        if !(*m > 0.0 && *m >= threshold && leakage(x) <= limit) {
            continue;
        }
        let key = alignment.map_or(*m, |al| al.score(x, y));
        if chosen.is_none_or(|(ck, _)| key > ck) {
            chosen = Some((key, x));
        }
    }
    if let Some((_, x)) = chosen {
        return Ok(x.clone());
    }
    for _ in pilot.len()..cfg.anchor_budget {
        let x = uniform_in_ball(&mut g, d, radius);
        let m = margin(&x);
        if m > 0.0 && m >= threshold && leakage(&x) <= limit {
            return Ok(x);
        }
    }
    Err(Error::AnchorSearch(format!(
        "no point within radius {radius:.3} has margin >= {threshold:.3e} and leakage <= {limit:.3e}"
    )))
}

/// Closed-form dual solution on a Gaussian teaching set.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Unit-norm model `η / √(ηᵀΛη)` over boundary points then anchors.
    pub model: DualModel,
    /// Unnormalized solution of `Λη = ν`.
    pub eta: Vec<f64>,
    /// `ηᵀΛη`, which equals the anchor coefficient for a single anchor.
    pub beta0: f64,
    pub solve: Solve,
}

/// Solves `Λη = (0, …, 0, y_a)` over the distinct boundary points followed by
/// the anchors, then normalizes to unit RKHS norm.
pub fn closed_form_dual(ts: &TeachingSet, sigma: f64) -> Result<Certificate> {
    let spec = KernelSpec::Gaussian { sigma };
    spec.validate()?;
    let anchors = ts.anchors();
    if anchors.is_empty() {
        return Err(Error::invalid("teaching set has no anchor"));
    }
    let mut centers = ts.boundary_points();
    let mut rhs = vec![0.0; centers.len()];
    for (a, y) in &anchors {
        centers.push(a.clone());
        rhs.push(y.value());
    }
    let gram = gram_matrix(&spec, &centers)?;
    let solve = solve_positive_definite(&gram.entries, &rhs)?;
    let eta = solve.solution.clone();
    let beta0 = gram.entries.quadratic_form(&eta);
    if !(beta0 > 0.0) {
        return Err(Error::invalid("certificate has non-positive norm"));
    }
    let model = DualModel::new(spec, centers, eta.iter().map(|e| e / beta0.sqrt()).collect())?;
    Ok(Certificate {
        model,
        eta,
        beta0,
        solve,
    })
}
