use kteach::linalg::{
    extend_orthogonal_basis, gram_matrix, select_independent, select_pivoted, solve_positive_definite,
    Matrix,
};
use kteach::{Error, KernelSpec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_row_iterator(rows.len(), rows[0].len(), rows.iter().flatten().copied());
    m.rank(1e-10)
}

#[test]
fn gram_examples() {
    let g = KernelSpec::Gaussian { sigma: 0.9 };
    assert_eq!(gram_matrix(&g, &[vec![0.2, 0.1]]).unwrap().entries[(0, 0)], 1.0);
    let two = gram_matrix(&g, &[vec![0.2, 0.1], vec![0.2, 0.1]]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(two.entries[(i, j)], 1.0);
        }
    }
    // ‖z − a‖²/2σ² = ln(1/ε) puts ε off the diagonal.
    let eps: f64 = 0.05;
    let dist = (2.0 * 0.81 * (1.0 / eps).ln()).sqrt();
    let far = gram_matrix(&g, &[vec![0.0, 0.0], vec![dist, 0.0]]).unwrap();
    assert!((far.entries[(0, 1)] - eps).abs() < 1e-14);
    assert!(gram_matrix(&g, &[vec![0.0], vec![0.0, 1.0]]).is_err());
}

#[test]
fn solver_examples() {
    let c = 0.3;
    let m = Matrix::from_rows(&[vec![1.0, c], vec![c, 1.0]]).unwrap();
    let s = solve_positive_definite(&m, &[0.0, 1.0]).unwrap();
    let det = 1.0 - c * c;
    assert!((s.solution[0] + c / det).abs() < 1e-14);
    assert!((s.solution[1] - 1.0 / det).abs() < 1e-14);

    let rhs = [3.0, -1.5, 2.25];
    assert_eq!(solve_positive_definite(&Matrix::identity(3), &rhs).unwrap().solution, rhs);

    let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![2.0 * i as f64, 0.0]).collect();
    let g = gram_matrix(&KernelSpec::Gaussian { sigma: 0.9 }, &pts).unwrap();
    let s = solve_positive_definite(&g.entries, &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert!(s.residual <= 1e-10);

    let singular = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(matches!(
        solve_positive_definite(&singular, &[1.0, 0.0]),
        Err(Error::Singular { index: 1, .. })
    ));
}

#[test]
fn selection_examples() {
    let a = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
    assert_eq!(select_independent(&a, 2, 1e-8).unwrap(), vec![0, 1]);
    let b = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]];
    assert_eq!(select_independent(&b, 2, 1e-8).unwrap(), vec![0, 2]);

    let mut g = kteach::rng::rng(11);
    let vs: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..20).map(|_| g.random_range(-1.0..1.0)).collect())
        .collect();
    for pick in [select_independent(&vs, 20, 1e-8).unwrap(), select_pivoted(&vs, 20, 1e-8)] {
        assert_eq!(pick.len(), 20);
        let rows: Vec<Vec<f64>> = pick.iter().map(|&i| vs[i].clone()).collect();
        assert_eq!(rank(&rows), 20);
    }
}

#[test]
fn published_basis_passes_postconditions() {
    let theta = [-3.0, 3.0, 5.0];
    let published = [[0.46, 0.86, -0.24], [0.76, -0.24, 0.6]];
    for v in &published {
        assert!((dot(v, &theta) / 5.83).abs() < 0.01 * 5.0);
        assert!((dot(v, v).sqrt() - 1.0).abs() < 0.01);
    }
    assert!(dot(&published[0], &published[1]).abs() < 0.01);
}

/// Unit vectors in ℝ^m with pairwise coherence ≤ 1/(2n), built by perturbing
/// the first `n` standard axes.
fn near_orthonormal(n: usize, m: usize, g: &mut impl Rng) -> Vec<Vec<f64>> {
    loop {
        let scale = 0.3 / (n as f64 * (m as f64).sqrt());
        let vs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut v: Vec<f64> = (0..m).map(|_| g.random_range(-scale..scale)).collect();
                v[i] += 1.0;
                let nv = dot(&v, &v).sqrt();
                v.iter().map(|x| x / nv).collect()
            })
            .collect();
        let ok = (0..n).all(|i| (0..i).all(|j| dot(&vs[i], &vs[j]).abs() <= 1.0 / (2.0 * n as f64)));
        if ok {
            return vs;
        }
    }
}

#[test]
fn norm_from_projections_bound() {
    let mut g = kteach::rng::rng(2024);
    for n in [3usize, 5, 10, 20] {
        for eps in [1e-2, 1e-4] {
            for _ in 0..100 {
                let m = n + g.random_range(0..4);
                let vs = near_orthonormal(n, m, &mut g);
                // p = Σ cᵢ vᵢ with prescribed projections bᵢ = p·vᵢ ∈ [−ε, ε].
                let b: Vec<f64> = (0..n).map(|_| g.random_range(-eps..=eps)).collect();
                let gram = DMatrix::from_fn(n, n, |i, j| dot(&vs[i], &vs[j]));
                let c = gram.clone().cholesky().unwrap().solve(&DVector::from_vec(b.clone()));
                let mut p = vec![0.0; m];
                for (ci, v) in c.iter().zip(&vs) {
                    p.iter_mut().zip(v).for_each(|(pk, vk)| *pk += ci * vk);
                }
                for (v, bi) in vs.iter().zip(&b) {
                    assert!((dot(&p, v) - bi).abs() <= 1e-12);
                    assert!(dot(&p, v).abs() <= eps * (1.0 + 1e-9));
                }
                let bound = (2.0 * n as f64).sqrt() * eps;
                assert!(dot(&p, &p).sqrt() <= bound, "n={n} eps={eps}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn basis_is_orthonormal_and_orthogonal_to_theta(
        theta in prop::collection::vec(-5.0f64..5.0, 1..=12)
            .prop_filter("nonzero", |t| t.iter().any(|v| v.abs() > 1e-3)),
    ) {
        let basis = extend_orthogonal_basis(&theta).unwrap();
        prop_assert_eq!(basis.len(), theta.len() - 1);
        let tn = dot(&theta, &theta).sqrt();
        for (i, v) in basis.iter().enumerate() {
            prop_assert!((dot(v, v).sqrt() - 1.0).abs() <= 1e-12);
            prop_assert!((dot(v, &theta) / tn).abs() <= 1e-10);
            for w in &basis[..i] {
                prop_assert!(dot(v, w).abs() <= 1e-10);
            }
        }
        prop_assert_eq!(extend_orthogonal_basis(&theta).unwrap(), basis);
    }

    #[test]
    fn solver_agrees_with_nalgebra(n in 1usize..12, seed in any::<u64>()) {
        let mut g = kteach::rng::rng(seed);
        let a = DMatrix::from_fn(n, n, |_, _| g.random_range(-1.0..1.0));
        let spd = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| spd[(i, j)]).collect()).collect();
        let rhs: Vec<f64> = (0..n).map(|_| g.random_range(-1.0..1.0)).collect();
        let ours = solve_positive_definite(&Matrix::from_rows(&rows).unwrap(), &rhs).unwrap();
        let want = spd.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        for (x, y) in ours.solution.iter().zip(want.iter()) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + y.abs()));
        }
        let max_rhs = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(ours.residual <= 1e-8 * (1.0 + max_rhs));
    }

    #[test]
    fn gram_is_symmetric_with_unit_diagonal(seed in any::<u64>(), n in 1usize..15) {
        let mut g = kteach::rng::rng(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| g.random_range(-2.0..2.0)).collect()).collect();
        let spec = KernelSpec::Gaussian { sigma: 0.9 };
        let gm = gram_matrix(&spec, &pts).unwrap();
        for i in 0..n {
            prop_assert_eq!(gm.entries[(i, i)], 1.0);
            for j in 0..n {
                prop_assert_eq!(gm.entries[(i, j)], gm.entries[(j, i)]);
                prop_assert_eq!(gm.entries[(i, j)], spec.eval(&pts[i], &pts[j]).unwrap());
            }
        }
    }

    #[test]
    fn selections_are_full_rank(seed in any::<u64>(), dim in 2usize..10, count in 1usize..30) {
        let mut g = kteach::rng::rng(seed);
        // Half the vectors are copies of earlier ones, so dependence is guaranteed.
        let mut vs: Vec<Vec<f64>> = Vec::new();
        for i in 0..count {
            if i % 2 == 1 {
                let c = vs[i - 1].iter().map(|x| 2.0 * x).collect();
                vs.push(c);
            } else {
                vs.push((0..dim).map(|_| g.random_range(-1.0..1.0)).collect());
            }
        }
        for pick in [select_independent(&vs, dim, 1e-8).unwrap(), select_pivoted(&vs, dim, 1e-8)] {
            prop_assert!(pick.len() <= dim);
            let rows: Vec<Vec<f64>> = pick.iter().map(|&i| vs[i].clone()).collect();
            prop_assert_eq!(rank(&rows), pick.len());
            prop_assert_eq!(pick.len(), rank(&vs).min(dim));
        }
    }
}
