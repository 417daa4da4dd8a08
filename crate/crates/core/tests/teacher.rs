use kteach::datasets::{generate, train_reference, DatasetKind, reference_config};
use kteach::eval::direction_similarity;
use kteach::kernel::poly_feature_map;
use kteach::linalg::{gram_matrix, solve_positive_definite};
use kteach::sample::{Label, Tag};
use kteach::teacher::{
    check_assumptions, closed_form_dual, counterexample_target, gaussian_teaching_set, linear_teaching_set,
    polynomial_boundary_points, polynomial_teaching_set, GaussianTeachConfig, RConvention, SearchConfig,
};
use kteach::{fit, rkhs_norm, training_loss, Error, Hypothesis, KernelSpec, LearnerConfig, Model, PrimalModel};
use proptest::prelude::*;
use std::sync::OnceLock;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn poly_target(coords: &[f64]) -> PrimalModel {
    PrimalModel::new(KernelSpec::Polynomial { degree: 2 }, 2, coords.to_vec()).unwrap()
}

/// ℓ1 norm of the unit-norm dual certificate for a polynomial set.
fn certificate_l1(ts: &kteach::TeachingSet) -> f64 {
    let spec = KernelSpec::Polynomial { degree: 2 };
    let mut centers: Vec<Vec<f64>> = ts.boundary_points();
    centers.push(ts.anchors()[0].0.clone());
    let g = gram_matrix(&spec, &centers).unwrap();
    let mut rhs = vec![0.0; centers.len()];
    *rhs.last_mut().unwrap() = 1.0;
    let eta = solve_positive_definite(&g.entries, &rhs).unwrap().solution;
    let m = kteach::DualModel::new(spec, centers, eta).unwrap();
    m.coefficient_l1() / rkhs_norm(&m).unwrap()
}

/// Reference model on moons, shared by the Gaussian tests.
fn moons_reference() -> &'static kteach::DualModel {
    static REF: OnceLock<kteach::DualModel> = OnceLock::new();
    REF.get_or_init(|| {
        let data = generate(DatasetKind::Moons, 120, 0.1, 3).unwrap();
        train_reference(&data, KernelSpec::Gaussian { sigma: 0.9 }, &reference_config(3))
            .unwrap()
            .model
    })
}

#[test]
fn linear_examples() {
    let theta = [-3.0, 3.0, 5.0];
    let ts = linear_teaching_set(&theta).unwrap();
    assert_eq!(ts.len(), 4);
    assert!(ts.items.iter().all(|it| it.y == Label::Positive));

    let published = [
        [0.46, 0.86, -0.24],
        [0.76, -0.24, 0.6],
        [-1.22, -0.62, -0.36],
        [-0.46, 0.46, 0.76],
    ];
    let tn = norm(&theta);
    for p in &published[..3] {
        assert!((dot(p, &theta) / tn).abs() < 0.05, "{p:?}");
    }
    assert!((dot(&published[3], &theta) - 6.56).abs() < 1e-9);

    let one = linear_teaching_set(&[2.0]).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one.items[0].x, vec![2.0]);
    assert_eq!(one.items[0].y, Label::Positive);
    assert!(linear_teaching_set(&[0.0, 0.0]).is_err());

    let report = check_assumptions(&ts, &PrimalModel::new(KernelSpec::Linear, 3, theta.to_vec()).unwrap(), None)
        .unwrap();
    assert_eq!(report.requested_rank, 2);
    assert_eq!(report.achieved_rank, 2);
}

#[test]
fn polynomial_examples() {
    let theta = poly_target(&[1.0, 4.0, 4.0]);
    // x₁² + 4√2·x₁x₂ + 4x₂² vanishes at (2 − 2√2, 1).
    let z = [2.0 - 2.0 * 2f64.sqrt(), 1.0];
    let phi = poly_feature_map(2, 2, &z).unwrap();
    assert!(dot(theta.coords(), &phi.coords).abs() < 1e-12);

    let search = SearchConfig::default();
    assert!(polynomial_boundary_points(&theta, 0, 1, &search).unwrap().is_empty());

    let (ts, report) = polynomial_teaching_set(&theta, 1, &search).unwrap();
    assert_eq!(ts.len(), 5);
    assert_eq!(report.achieved_rank, 2);
    assert!(report.assumption1_ok);
    let anchors = ts.anchors();
    assert_eq!(anchors.len(), 1);
    assert!(theta.decision_value(&anchors[0].0).unwrap() > 0.0);
    for z in ts.boundary_points() {
        assert!(theta.decision_value(&z).unwrap().abs() <= 1e-10 * search.ball_radius.powi(2) * norm(theta.coords()));
        let twins = ts.items.iter().filter(|it| it.x == z).count();
        assert_eq!(twins, 2);
    }
}

#[test]
fn counterexample_fails_cleanly() {
    for d in [2usize, 3] {
        for k in [2u32, 4] {
            let theta = counterexample_target(d, k).unwrap();
            let search = SearchConfig {
                budget: 20_000,
                ..SearchConfig::default()
            };
            match polynomial_teaching_set(&theta, 9, &search) {
                Err(Error::BoundarySearch { achieved: 0, .. }) => {}
                other => panic!("d={d} k={k}: expected a boundary failure, got {other:?}"),
            }
        }
    }
}

#[test]
fn certificate_examples() {
    let sigma = 0.9;
    let z = vec![0.3, 0.0];
    let a = vec![-0.2, 0.5];
    let ts = kteach::TeachingSet::from_boundary(std::slice::from_ref(&z), &[(a.clone(), Label::Positive)]).unwrap();
    let cert = closed_form_dual(&ts, sigma).unwrap();
    let c = KernelSpec::Gaussian { sigma }.eval(&z, &a).unwrap();
    // η ∝ (−c, 1) and f̂(a) = 1 − c² before normalization.
    let ratio = cert.eta[0] / cert.eta[1];
    assert!((ratio + c).abs() < 1e-12);
    let unnormalized = kteach::DualModel::new(cert.model.spec, cert.model.centers.clone(), cert.eta.clone()).unwrap();
    let fa = unnormalized.decision_value(&a).unwrap();
    assert!((fa - cert.eta[1] * (1.0 - c * c)).abs() < 1e-12);
    assert!((rkhs_norm(&unnormalized).unwrap() - cert.beta0.sqrt()).abs() < 1e-12);
    assert!(cert.model.decision_value(&z).unwrap().abs() < 1e-12);

    let anchor_only = kteach::TeachingSet::from_boundary(&[], &[(a.clone(), Label::Positive)]).unwrap();
    let cert = closed_form_dual(&anchor_only, sigma).unwrap();
    assert_eq!(cert.eta, vec![1.0]);
    assert!((rkhs_norm(&cert.model).unwrap() - 1.0).abs() < 1e-15);

    let dup = kteach::TeachingSet::from_boundary(std::slice::from_ref(&a), &[(a.clone(), Label::Positive)]);
    if let Ok(dup) = dup {
        assert!(closed_form_dual(&dup, sigma).is_err());
    }
}

#[test]
fn gaussian_set_at_s5() {
    let theta = moons_reference();
    let cfg = GaussianTeachConfig {
        order: Some(5),
        ..GaussianTeachConfig::default()
    };
    let gt = gaussian_teaching_set(theta, &cfg, 17).unwrap();
    let r = gt.config.feature_dim();
    assert_eq!(r, 21);
    assert_eq!(gt.set.len(), 2 * 20 + 1);
    assert_eq!(gt.set.boundary_points().len(), 20);
    assert_eq!(gt.report.achieved_rank, 20);
    assert!(gt.report.assumption1_ok);

    let radius = gt.config.teaching_radius(0.9);
    for it in &gt.set.items {
        assert!(norm(&it.x) <= radius * (1.0 + 1e-12));
    }
    for z in gt.set.boundary_points() {
        assert!(gt.theta_tilde.decision_value(&z).unwrap().abs() <= 1e-10);
    }
    let cert = closed_form_dual(&gt.set, 0.9).unwrap();
    assert!(training_loss(&cert.model, &gt.set).unwrap() <= 1e-10);
    let (a, _) = &gt.set.anchors()[0];
    assert!(cert.model.decision_value(a).unwrap() > 0.0);

    let again = gaussian_teaching_set(theta, &cfg, 17).unwrap();
    assert_eq!(again.set, gt.set);

    let appendix = GaussianTeachConfig {
        convention: RConvention::Appendix,
        ..cfg
    };
    let ga = gaussian_teaching_set(theta, &appendix, 17).unwrap();
    assert_eq!(ga.set.len(), 2 * 20 + 2);
    let anchors = ga.set.anchors();
    assert_eq!(anchors.len(), 2);
    assert!(anchors.iter().any(|(_, y)| *y == Label::Negative));
    for (a, y) in &anchors {
        assert!(y.value() * ga.theta_tilde.decision_value(a).unwrap() > 0.0);
    }
    let cert = closed_form_dual(&ga.set, 0.9).unwrap();
    assert!(training_loss(&cert.model, &ga.set).unwrap() <= 1e-10);
}

#[test]
fn gaussian_learner_reaches_zero_loss() {
    let theta = moons_reference();
    for s in [3u32, 6] {
        let cfg = GaussianTeachConfig {
            order: Some(s),
            ..GaussianTeachConfig::default()
        };
        let gt = gaussian_teaching_set(theta, &cfg, 5).unwrap();
        let f = fit(&gt.set, KernelSpec::Gaussian { sigma: 0.9 }, &LearnerConfig::default()).unwrap();
        assert!(f.loss <= 1e-6);
        let (a, _) = &gt.set.anchors()[0];
        assert!(f.model.decision_value(a).unwrap() > 0.0);
        assert!(f.coefficient_l1 <= 10.0 * (gt.set.len() as f64));
    }
}

#[test]
fn gaussian_teaching_rejects_bad_input() {
    let theta = moons_reference();
    let bad = GaussianTeachConfig {
        epsilon: 1.5,
        ..GaussianTeachConfig::default()
    };
    assert!(gaussian_teaching_set(theta, &bad, 1).is_err());
    let poly = kteach::DualModel::new(KernelSpec::Polynomial { degree: 2 }, vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
    assert!(gaussian_teaching_set(&poly, &GaussianTeachConfig::default(), 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_set_invariants(theta in prop::collection::vec(-5.0f64..5.0, 2..=10)
        .prop_filter("nonzero", |t| t.iter().map(|v| v * v).sum::<f64>() > 1e-4))
    {
        let d = theta.len();
        let ts = linear_teaching_set(&theta).unwrap();
        prop_assert_eq!(ts.len(), d + 1);
        prop_assert!(ts.items.iter().all(|it| it.y == Label::Positive));
        let tn = norm(&theta);
        let mut sum = vec![0.0; d];
        for it in &ts.items[..d] {
            prop_assert!((dot(&it.x, &theta) / tn).abs() <= 1e-10);
            sum.iter_mut().zip(&it.x).for_each(|(s, x)| *s += x);
        }
        prop_assert!(norm(&sum) <= 1e-10 * d as f64);
        prop_assert_eq!(ts.items[d].tag, Tag::Anchor);
        prop_assert!(dot(&ts.items[d].x, &theta) > 0.0);

        let f = fit(&ts, KernelSpec::Linear, &LearnerConfig::default()).unwrap();
        let target = Model::from(PrimalModel::new(KernelSpec::Linear, d, theta.clone()).unwrap());
        prop_assert!(direction_similarity(&Model::from(f.model), &target).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn polynomial_sets_recover_random_targets(
        coords in prop::collection::vec(-3.0f64..3.0, 3),
        seed in any::<u64>(),
    ) {
        let theta = poly_target(&coords);
        // An indefinite quadratic form has a real zero set; the anchor needs a positive value.
        let det = coords[0] * coords[2] - coords[1] * coords[1] / 2.0;
        prop_assume!(det < -0.05);
        let (ts, report) = polynomial_teaching_set(&theta, seed, &SearchConfig::default()).unwrap();
        prop_assert_eq!(ts.len(), 5);
        prop_assert!(report.assumption1_ok);
        // The zero-loss direction is unique, so the fit is feasible exactly when the
        // certificate's coefficients fit under the default cap of 10·r.
        prop_assume!(certificate_l1(&ts) <= 0.9 * 30.0);
        let f = fit(&ts, KernelSpec::Polynomial { degree: 2 }, &LearnerConfig::default()).unwrap();
        let cos = direction_similarity(&Model::from(f.model.to_primal().unwrap()), &Model::from(theta)).unwrap();
        prop_assert!(cos >= 1.0 - 1e-4, "cos {}", cos);
    }
}
