//! Small dense linear algebra: orthogonal basis extension, kernel Gram
//! matrices, Cholesky solves and greedy independence selection.

use std::ops::{Index, IndexMut};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::kernel::{dot, norm, KernelSpec};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthonormal basis of the complement of `theta`: `d − 1` unit vectors, each
/// orthogonal to `theta` and to one another.
///
/// Starts from the standard basis with the axis most aligned to `theta`
/// removed, and runs two passes of modified Gram–Schmidt.
pub fn extend_orthogonal_basis(theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_finite(theta, "theta")?;
    let d = theta.len();
    let n = norm(theta);
    if d == 0 || n == 0.0 {
        return Err(Error::invalid("theta must be a nonzero vector"));
    }
    let unit: Vec<f64> = theta.iter().map(|v| v / n).collect();
    let drop = (0..d)
        .max_by(|&a, &b| unit[a].abs().total_cmp(&unit[b].abs()))
        .unwrap();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    basis.push(unit);
    for axis in (0..d).filter(|&i| i != drop) {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let vn = norm(&v);
        v.iter_mut().for_each(|x| *x /= vn);
        basis.push(v);
    }
    basis.remove(0);
    Ok(basis)
}

/// Kernel Gram matrix `Λ[i, j] = K(pᵢ, pⱼ)` over a point set.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: Matrix,
    pub points: Vec<Vec<f64>>,
    pub spec: KernelSpec,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn gram_matrix(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<GramMatrix> {
    spec.validate()?;
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("gram matrix needs at least one point"))?;
    if first.is_empty() {
        return Err(Error::invalid("input dimension must be >= 1"));
    }
    for p in points {
        check_dim(first.len(), p.len())?;
        check_finite(p, "gram point")?;
    }
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval_unchecked(&points[i], &points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        entries: m,
        points: points.to_vec(),
        spec: *spec,
    })
}

/// Solution of a positive-definite system with diagnostics.
#[derive(Debug, Clone)]
pub struct Solve {
    pub solution: Vec<f64>,
    /// `(max Lᵢᵢ / min Lᵢᵢ)²` of the Cholesky factor; a cheap lower estimate
    /// of the 2-norm condition number.
    pub condition_estimate: f64,
    /// `‖M x − b‖∞` of the returned solution.
    pub residual: f64,
}

const REFINEMENT_STEPS: usize = 3;

/// Relative residual accepted by [`solve_positive_definite`].
pub const SOLVE_TOLERANCE: f64 = 1e-8;

/// Solves `M x = rhs` for symmetric positive-definite `M` by Cholesky
/// factorization plus iterative refinement. Fails on a non-positive pivot
/// rather than regularizing.
pub fn solve_positive_definite(m: &Matrix, rhs: &[f64]) -> Result<Solve> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::invalid("matrix must be square"));
    }
    check_dim(n, rhs.len())?;
    check_finite(rhs, "right-hand side")?;
    if !m.is_symmetric(1e-12 * (1.0 + max_abs(&m.data))) {
        return Err(Error::invalid("matrix must be symmetric"));
    }
    let chol = Cholesky::factor(m)?;

    let mut x = chol.solve(rhs);
    let tolerance = SOLVE_TOLERANCE * (1.0 + max_abs(rhs));
    let mut residual_vec = residual(m, &x, rhs);
    let mut res = max_abs(&residual_vec);
    for _ in 0..REFINEMENT_STEPS {
        if res <= tolerance * 1e-4 {
            break;
        }
        let correction = chol.solve(&residual_vec);
        let candidate: Vec<f64> = x.iter().zip(&correction).map(|(a, c)| a + c).collect();
        let cand_res_vec = residual(m, &candidate, rhs);
        let cand_res = max_abs(&cand_res_vec);
        if cand_res >= res {
            break;
        }
        x = candidate;
        residual_vec = cand_res_vec;
        res = cand_res;
    }
    if res > tolerance {
        return Err(Error::SolveResidual {
            residual: res,
            tolerance,
        });
    }
    Ok(Solve {
        solution: x,
        condition_estimate: chol.condition_estimate(),
        residual: res,
    })
}

fn residual(m: &Matrix, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    // b − M x, so that adding the solved correction improves x.
    m.mul_vec(x).iter().zip(rhs).map(|(mx, b)| b - mx).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) struct Cholesky {
    /// Lower-triangular factor, row-major.
    l: Matrix,
}

impl Cholesky {
    /// Solve with up to [`REFINEMENT_STEPS`] rounds of iterative refinement
    /// against the original matrix `m`.
    pub(crate) fn solve_refined(&self, m: &Matrix, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.solve(rhs);
        let mut r = residual(m, &x, rhs);
        let mut res = max_abs(&r);
        for _ in 0..REFINEMENT_STEPS {
            let c = self.solve(&r);
            let cand: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a + b).collect();
            let cand_r = residual(m, &cand, rhs);
            let cand_res = max_abs(&cand_r);
            if cand_res >= res {
                break;
            }
            (x, r, res) = (cand, cand_r, cand_res);
        }
        x
    }

    pub(crate) fn factor(m: &Matrix) -> Result<Self> {
        let n = m.rows();
        let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(m[(i, i)].abs()));
        let pivot_floor = (n as f64) * f64::EPSILON * max_diag;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = m[(j, j)];
            for k in 0..j {
                diag -= l[(j, k)] * l[(j, k)];
            }
            if !(diag > pivot_floor) {
                return Err(Error::Singular {
                    index: j,
                    value: diag,
                });
            }
            let ljj = diag.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut v = m[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let l = &self.l;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = b[i];
            for k in 0..i {
                v -= l[(i, k)] * y[k];
            }
            y[i] = v / l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in (i + 1)..n {
                v -= l[(k, i)] * x[k];
            }
            x[i] = v / l[(i, i)];
        }
        x
    }

    fn condition_estimate(&self) -> f64 {
        let n = self.l.rows();
        let (lo, hi) = (0..n).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            let v = self.l[(i, i)];
            (lo.min(v), hi.max(v))
        });
        (hi / lo).powi(2)
    }
}

/// Incrementally maintained orthonormal basis used to test whether a new
/// vector is independent of those already accepted.
#[derive(Debug, Clone, Default)]
pub struct IndependentSet {
    basis: Vec<Vec<f64>>,
    threshold: f64,
}

impl IndependentSet {
    /// `threshold` is the absolute residual norm a vector must exceed.
    pub fn new(threshold: f64) -> Self {
        IndependentSet {
            basis: Vec::new(),
            threshold,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Norm of the component of `v` orthogonal to the accepted span.
    pub fn residual_norm(&self, v: &[f64]) -> f64 {
        norm(&self.project_out(v))
    }

    fn project_out(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
            }
        }
        r
    }

    /// Accepts `v` if it is independent of the current span.
    pub fn try_push(&mut self, v: &[f64]) -> bool {
        let r = self.project_out(v);
        let rn = norm(&r);
        if !(rn > self.threshold) {
            return false;
        }
        self.basis.push(r.into_iter().map(|x| x / rn).collect());
        true
    }
}

/// Greedily selects, in input order, up to `target_count` vectors that are
/// linearly independent. A vector is accepted when its residual after
/// projecting out the accepted span exceeds `pivot_tol` times the largest
/// vector norm in the batch.
pub fn select_independent<V: AsRef<[f64]>>(
    vectors: &[V],
    target_count: usize,
    pivot_tol: f64,
) -> Result<Vec<usize>> {
    if !(pivot_tol > 0.0) {
        return Err(Error::invalid("pivot tolerance must be positive"));
    }
    let Some(first) = vectors.first() else {
        return Err(Error::invalid("no vectors to select from"));
    };
    let len = first.as_ref().len();
    for v in vectors {
        check_dim(len, v.as_ref().len())?;
    }
    let scale = vectors
        .iter()
        .map(|v| norm(v.as_ref()))
        .fold(0.0f64, f64::max);
    let mut set = IndependentSet::new(pivot_tol * scale);
    let mut chosen = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if chosen.len() == target_count {
            break;
        }
        if set.try_push(v.as_ref()) {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

/// Row reduction with pivoting: repeatedly picks the vector with the largest
/// residual against the span of those already picked, stopping at
/// `target_count` picks or when no residual exceeds `pivot_tol` (absolute).
/// Returns indices in pick order.
pub fn select_pivoted<V: AsRef<[f64]>>(vectors: &[V], target_count: usize, pivot_tol: f64) -> Vec<usize> {
    let mut residuals: Vec<Vec<f64>> = vectors.iter().map(|v| v.as_ref().to_vec()).collect();
    let mut norms2: Vec<f64> = residuals.iter().map(|r| dot(r, r)).collect();
    let mut taken = vec![false; vectors.len()];
    let mut chosen = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < target_count {
        let best = (0..residuals.len())
            .filter(|&i| !taken[i])
            .max_by(|&a, &b| norms2[a].total_cmp(&norms2[b]));
        let Some(i) = best else { break };
        // A second projection pass restores orthogonality lost in the updates.
        for q in &basis {
            let c = dot(q, &residuals[i]);
            residuals[i].iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
        }
        let n = norm(&residuals[i]);
        if !(n > pivot_tol) {
            break;
        }
        taken[i] = true;
        chosen.push(i);
        let q: Vec<f64> = residuals[i].iter().map(|x| x / n).collect();
        for (j, r) in residuals.iter_mut().enumerate() {
            if taken[j] {
                continue;
            }
            let c = dot(&q, r);
            r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= c * qi);
            norms2[j] = dot(r, r);
        }
        basis.push(q);
    }
    chosen
}
