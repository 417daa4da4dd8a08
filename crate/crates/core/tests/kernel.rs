use kteach::kernel::{multi_indices, poly_feature_map, truncated_gaussian_feature_map};
use kteach::model::{DualModel, Hypothesis, PrimalModel};
use kteach::{choose_truncation, eval_kernel, feature_dim, taylor_tail_bound, FeatureMap, KernelSpec};
use proptest::prelude::*;

/// C(n, k) from Pascal's triangle, independent of the library's combinatorics.
fn pascal(n: usize, k: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![1usize; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[k]
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn vec_in(d: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, d)
}

#[test]
fn kernel_examples() {
    let g = KernelSpec::Gaussian { sigma: 1.0 };
    assert_eq!(eval_kernel(&g, &[0.3, -0.7], &[0.3, -0.7]).unwrap(), 1.0);
    let p = KernelSpec::Polynomial { degree: 2 };
    assert_eq!(eval_kernel(&p, &[1.0, 2.0], &[3.0, 1.0]).unwrap(), 25.0);
    let t = KernelSpec::TruncatedGaussian { sigma: 1.0, order: 0 };
    let v = eval_kernel(&t, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    assert!(eval_kernel(&g, &[1.0], &[1.0, 2.0]).is_err());
    assert!(eval_kernel(&g, &[f64::NAN], &[1.0]).is_err());
}

#[test]
fn feature_dim_examples() {
    assert_eq!(feature_dim(&KernelSpec::Polynomial { degree: 2 }, 2).unwrap(), 3);
    assert_eq!(
        feature_dim(&KernelSpec::TruncatedGaussian { sigma: 0.9, order: 5 }, 2).unwrap(),
        21
    );
    assert_eq!(feature_dim(&KernelSpec::Linear, 7).unwrap(), 7);
    assert!(feature_dim(&KernelSpec::Gaussian { sigma: 1.0 }, 2).is_err());
}

#[test]
fn feature_dim_matches_pascal() {
    for d in 1..=5usize {
        for k in 1..=8u32 {
            let poly = feature_dim(&KernelSpec::Polynomial { degree: k }, d).unwrap();
            assert_eq!(poly, pascal(d + k as usize - 1, k as usize));
            let tg = feature_dim(&KernelSpec::TruncatedGaussian { sigma: 1.0, order: k }, d).unwrap();
            assert_eq!(tg, pascal(d + k as usize, k as usize));
        }
    }
}

#[test]
fn multi_index_examples() {
    let m: Vec<Vec<u32>> = multi_indices(2, 2)
        .unwrap()
        .iter()
        .map(|l| l.as_slice().to_vec())
        .collect();
    assert_eq!(m, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    let z = multi_indices(3, 0).unwrap();
    assert_eq!(z.len(), 1);
    assert_eq!(z[0].as_slice(), &[0, 0, 0]);
    assert_eq!(multi_indices(2, 3).unwrap().len(), 4);
    for d in 1..=4 {
        for order in 0..=6u32 {
            let all = multi_indices(d, order).unwrap();
            assert_eq!(all.len(), pascal(d + order as usize - 1, order as usize));
            assert!(all.iter().all(|l| l.order() == order));
            assert!(all.windows(2).all(|w| w[0].as_slice() > w[1].as_slice()));
        }
    }
}

#[test]
fn feature_map_examples() {
    let phi = poly_feature_map(2, 2, &[1.0, 1.0]).unwrap();
    let want = [1.0, 2f64.sqrt(), 1.0];
    for (a, b) in phi.coords.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(poly_feature_map(2, 2, &[2.0, 0.0]).unwrap().coords, vec![4.0, 0.0, 0.0]);
    let a = poly_feature_map(2, 2, &[1.0, 2.0]).unwrap();
    let b = poly_feature_map(2, 2, &[3.0, 1.0]).unwrap();
    assert!((a.dot(&b) - 25.0).abs() < 1e-12);

    assert_eq!(
        truncated_gaussian_feature_map(1, 1.0, 2, &[0.0]).unwrap().coords,
        vec![1.0, 0.0, 0.0]
    );
    let e = (-0.5f64).exp();
    let t = truncated_gaussian_feature_map(1, 1.0, 2, &[1.0]).unwrap();
    for (a, b) in t.coords.iter().zip([e, e, e / 2f64.sqrt()]) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn truncation_examples() {
    let c = choose_truncation(0.01, 2).unwrap();
    let r = 100f64.ln().powi(2) / std::f64::consts::E.powi(2);
    assert!((c.radius - r).abs() < 1e-12);
    assert!((c.radius - 2.870).abs() < 1e-3);
    assert_eq!(c.order, 22);
    let c = choose_truncation(0.5, 4).unwrap();
    assert_eq!(c.radius, 4.0);
    assert_eq!(c.order, 30);
    assert!((c.epsilon_s - 0.5 / 2f64.powi(30)).abs() < 1e-20);
    assert!(choose_truncation(1.0, 2).is_err());
    assert!(choose_truncation(0.0, 2).is_err());
    for eps in [0.5, 0.1, 0.01, 1e-4] {
        for d in [1, 2, 5] {
            let c = choose_truncation(eps, d).unwrap();
            let s = c.order;
            let lhs = c.radius.powi(s as i32 + 1) / factorial(s + 1);
            assert!(lhs <= eps, "eps {eps} d {d}: {lhs}");
        }
    }
}

#[test]
fn tail_bound_examples() {
    let b = taylor_tail_bound(1.0, 1.0, 1.0, 3).unwrap();
    assert!((b - 1.0 / 24.0).abs() < 1e-15);
    // 4^31 / 31!, by running product.
    let mut want = 1.0;
    for j in 1..=31 {
        want *= 4.0 / j as f64;
    }
    let b = taylor_tail_bound(2.0 * 0.9, 2.0 * 0.9, 0.9, 30).unwrap();
    assert!((b - want).abs() <= 1e-12 * want);
    for s in 0..20 {
        let u = 1.7;
        if u < (s + 2) as f64 {
            assert!(
                taylor_tail_bound(u, 1.0, 1.0, s + 1).unwrap() < taylor_tail_bound(u, 1.0, 1.0, s).unwrap()
            );
        }
    }
    assert!(taylor_tail_bound(-1.0, 1.0, 1.0, 2).is_err());
    assert!(taylor_tail_bound(1.0, 1.0, 0.0, 2).is_err());
}

#[test]
fn gaussian_features_match_kernel_at_s5() {
    let map = FeatureMap::new(KernelSpec::TruncatedGaussian { sigma: 0.9, order: 5 }, 2).unwrap();
    let mut g = kteach::rng::rng(3);
    use rand::Rng;
    for _ in 0..200 {
        let x: Vec<f64> = (0..2).map(|_| g.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..2).map(|_| g.random_range(-2.0..2.0)).collect();
        let k = eval_kernel(map.spec(), &x, &y).unwrap();
        let f = map.apply(&x).unwrap().dot(&map.apply(&y).unwrap());
        assert!((k - f).abs() <= 1e-12, "{k} vs {f}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_features_reproduce_kernel(d in 1usize..=4, k in 1u32..=6, seed in any::<u64>()) {
        let mut g = kteach::rng::rng(seed);
        use rand::Rng;
        let map = FeatureMap::new(KernelSpec::Polynomial { degree: k }, d).unwrap();
        for _ in 0..16 {
            let x: Vec<f64> = (0..d).map(|_| g.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| g.random_range(-2.0..2.0)).collect();
            let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let f = map.apply(&x).unwrap().dot(&map.apply(&y).unwrap());
            prop_assert!((f - ip.powi(k as i32)).abs() <= 1e-9, "{} vs {}", f, ip.powi(k as i32));
        }
    }

    #[test]
    fn truncated_features_reproduce_kernel(d in 1usize..=3, s in 0u32..=12, sigma in 0.5f64..2.0, seed in any::<u64>()) {
        let mut g = kteach::rng::rng(seed);
        use rand::Rng;
        let spec = KernelSpec::TruncatedGaussian { sigma, order: s };
        let map = FeatureMap::new(spec, d).unwrap();
        for _ in 0..16 {
            let x: Vec<f64> = (0..d).map(|_| g.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| g.random_range(-2.0..2.0)).collect();
            // Independent oracle: the kernel's closed form.
            let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / (sigma * sigma);
            let series: f64 = (0..=s).map(|j| ip.powi(j as i32) / factorial(j)).sum();
            let nx: f64 = x.iter().map(|v| v * v).sum();
            let ny: f64 = y.iter().map(|v| v * v).sum();
            let want = (-(nx + ny) / (2.0 * sigma * sigma)).exp() * series;
            let f = map.apply(&x).unwrap().dot(&map.apply(&y).unwrap());
            let k = eval_kernel(&spec, &x, &y).unwrap();
            prop_assert!((f - want).abs() <= 1e-9);
            prop_assert!((k - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn kernels_are_symmetric(x in vec_in(3, -2.0, 2.0), y in vec_in(3, -2.0, 2.0), k in 1u32..5, s in 0u32..10) {
        for spec in [
            KernelSpec::Linear,
            KernelSpec::Polynomial { degree: k },
            KernelSpec::Gaussian { sigma: 0.9 },
            KernelSpec::TruncatedGaussian { sigma: 0.9, order: s },
        ] {
            prop_assert_eq!(eval_kernel(&spec, &x, &y).unwrap(), eval_kernel(&spec, &y, &x).unwrap());
        }
        let g = eval_kernel(&KernelSpec::Gaussian { sigma: 0.9 }, &x, &y).unwrap();
        prop_assert!(g > 0.0 && g <= 1.0);
    }

    #[test]
    fn truncated_norm_contracts(x in vec_in(2, -3.0, 3.0), s in 0u32..15) {
        let phi = truncated_gaussian_feature_map(2, 0.9, s, &x).unwrap();
        prop_assert!(phi.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn graded_layout_is_a_prefix(x in vec_in(3, -2.0, 2.0), s in 0u32..8) {
        let a = truncated_gaussian_feature_map(3, 0.9, s, &x).unwrap();
        let b = truncated_gaussian_feature_map(3, 0.9, s + 1, &x).unwrap();
        prop_assert_eq!(&b.coords[..a.len()], &a.coords[..]);
    }

    #[test]
    fn tail_bound_holds_for_nonnegative_pairs(
        d in 1usize..=3,
        s in prop::sample::select(vec![3u32, 5, 8]),
        seed in any::<u64>(),
    ) {
        let sigma = 0.9;
        let cfg = choose_truncation(0.1, d).unwrap();
        let radius = cfg.input_radius(sigma);
        let mut g = kteach::rng::rng(seed);
        use rand::Rng;
        let gauss = KernelSpec::Gaussian { sigma };
        let trunc = KernelSpec::TruncatedGaussian { sigma, order: s };
        let mut tested = 0;
        while tested < 16 {
            let x: Vec<f64> = (0..d).map(|_| g.random_range(-radius..radius)).collect();
            let y: Vec<f64> = (0..d).map(|_| g.random_range(-radius..radius)).collect();
            let (nx, ny) = (norm(&x), norm(&y));
            if nx > radius || ny > radius || x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
                continue;
            }
            tested += 1;
            let gap = (eval_kernel(&gauss, &x, &y).unwrap() - eval_kernel(&trunc, &x, &y).unwrap()).abs();
            prop_assert!(gap <= taylor_tail_bound(nx, ny, sigma, s).unwrap() + 1e-15);
            let diag = (1.0 - eval_kernel(&trunc, &x, &x).unwrap()).abs();
            prop_assert!(diag <= taylor_tail_bound(nx, nx, sigma, s).unwrap() + 1e-15);
        }
    }

    #[test]
    fn dual_and_primal_agree(
        spec in prop_oneof![
            (1u32..=4).prop_map(|k| KernelSpec::Polynomial { degree: k }),
            (0u32..=8).prop_map(|s| KernelSpec::TruncatedGaussian { sigma: 0.9, order: s }),
            Just(KernelSpec::Linear),
        ],
        seed in any::<u64>(),
    ) {
        let mut g = kteach::rng::rng(seed);
        use rand::Rng;
        let centers: Vec<Vec<f64>> = (0..5).map(|_| (0..2).map(|_| g.random_range(-1.5..1.5)).collect()).collect();
        let coefs: Vec<f64> = (0..5).map(|_| g.random_range(-1.0..1.0)).collect();
        let dual = DualModel::new(spec, centers, coefs).unwrap();
        let primal: PrimalModel = dual.to_primal().unwrap();
        for _ in 0..32 {
            let x: Vec<f64> = (0..2).map(|_| g.random_range(-2.0..2.0)).collect();
            let a = dual.decision_value(&x).unwrap();
            let b = primal.decision_value(&x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
