//! Dense numerical kernels shared by every other module: sampling grids,
//! orthogonal least squares, a Jacobi symmetric eigensolver and a damped
//! Gauss-Newton solver for small nonlinear fits.
//!
//! Everything here is a pure function of its inputs.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "matrix row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    what: "matrix column length",
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Entries in column-major order.
    pub fn to_column_major(&self) -> Vec<f64> {
        (0..self.cols).flat_map(|j| self.column(j)).collect()
    }

    pub fn from_column_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        let mut m = Matrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = data[j * rows + i];
            }
        }
        Ok(m)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                what: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `selfᵀ · v` without forming the transpose.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                what: "transposed matrix-vector product",
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
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

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `n` equally spaced points from `lo` to `hi`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!("linspace needs at least 2 points, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::invalid(format!("linspace needs lo < hi, got [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    out[n - 1] = hi;
    Ok(out)
}

/// Vandermonde expansion `[1, x, x², …, x^degree]` for every sample.
pub fn vandermonde(x: &[f64], degree: usize) -> Matrix {
    let cols = degree + 1;
    let mut m = Matrix::zeros(x.len(), cols);
    for (i, &xi) in x.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..cols {
            m[(i, j)] = p;
            p *= xi;
        }
    }
    m
}

/// Householder reflector for `x`: returns `(v, beta, alpha)` with
/// `(I − beta·v·vᵀ)·x = alpha·e₁`. `beta == 0` means `x` is already zero.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let sigma = norm(x);
    if sigma == 0.0 {
        return (vec![0.0; x.len()], 0.0, 0.0);
    }
    let alpha = if x[0] >= 0.0 { -sigma } else { sigma };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vv = dot(&v, &v);
    (v, 2.0 / vv, alpha)
}

/// Column-major working copy used by the QR routines.
struct Columns {
    rows: usize,
    cols: Vec<Vec<f64>>,
}

impl Columns {
    fn from_matrix(a: &Matrix) -> Self {
        Columns {
            rows: a.rows(),
            cols: (0..a.cols()).map(|j| a.column(j)).collect(),
        }
    }

    /// Apply `I − beta·v·vᵀ` acting on rows `k..` of column `j`.
    fn reflect(col: &mut [f64], k: usize, v: &[f64], beta: f64) {
        let tail = &mut col[k..];
        let s = beta * dot(v, tail);
        for (c, vi) in tail.iter_mut().zip(v) {
            *c -= s * vi;
        }
    }
}

/// Least-squares solution of `A·c ≈ y`, minimum norm when `A` is rank deficient.
///
/// Householder QR with column pivoting determines the numerical rank
/// (threshold `ε·max(m, n)·|R₀₀|`); a second orthogonal factorization of the
/// leading rows then yields the minimum-norm solution. Wide systems are
/// handled the same way.
pub fn lstsq(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    if a.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "least squares right-hand side",
            expected: a.rows(),
            found: y.len(),
        });
    }
    if !a.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("least squares input contains non-finite values"));
    }
    let m = a.rows();
    let n = a.cols();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut work = Columns::from_matrix(a);
    let mut rhs = y.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);

    for k in 0..steps {
        // pivot on the largest remaining column norm
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let cn = norm(&work.cols[j][k..]);
            if cn > best_norm {
                best_norm = cn;
                best = j;
            }
        }
        work.cols.swap(k, best);
        perm.swap(k, best);

        let (v, beta, alpha) = householder(&work.cols[k][k..]);
        if beta == 0.0 {
            continue;
        }
        work.cols[k][k] = alpha;
        for c in work.cols[k][k + 1..].iter_mut() {
            *c = 0.0;
        }
        for j in k + 1..n {
            Columns::reflect(&mut work.cols[j], k, &v, beta);
        }
        Columns::reflect(&mut rhs, k, &v, beta);
    }

    let r00 = work.cols[0][0].abs();
    let tol = f64::EPSILON * m.max(n) as f64 * r00;
    let rank = (0..steps)
        .take_while(|&k| work.cols[k][k].abs() > tol)
        .count();

    let mut z = vec![0.0; n];
    if rank == n {
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..n {
                s -= work.cols[j][i] * z[j];
            }
            z[i] = s / work.cols[i][i];
        }
    } else if rank > 0 {
        // Leading block R_top (rank × n). Factor R_topᵀ = Q₂·[L; 0] so that
        // R_top = [Lᵀ 0]·Q₂ᵀ and the minimum-norm solution is Q₂·[L⁻ᵀc; 0].
        let mut t = Columns {
            rows: n,
            cols: (0..rank)
                .map(|i| (0..n).map(|j| work.cols[j][i]).collect())
                .collect(),
        };
        let mut reflectors = Vec::with_capacity(rank);
        for k in 0..rank {
            let (v, beta, alpha) = householder(&t.cols[k][k..]);
            if beta != 0.0 {
                t.cols[k][k] = alpha;
                for c in t.cols[k][k + 1..].iter_mut() {
                    *c = 0.0;
                }
                for j in k + 1..rank {
                    Columns::reflect(&mut t.cols[j], k, &v, beta);
                }
            }
            reflectors.push((v, beta));
        }
        debug_assert_eq!(t.rows, n);
        // Lᵀ is lower triangular with Lᵀ[i][j] = t.cols[i][j] for j ≤ i.
        let mut w = vec![0.0; n];
        for i in 0..rank {
            let mut s = rhs[i];
            for j in 0..i {
                s -= t.cols[i][j] * w[j];
            }
            w[i] = s / t.cols[i][i];
        }
        for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta != 0.0 {
                Columns::reflect(&mut w, k, v, *beta);
            }
        }
        z = w;
    }

    let mut c = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        c[p] = z[k];
    }
    Ok(c)
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order. Each eigenvector has its
/// largest-magnitude entry made positive (first such entry on ties), so the
/// output is reproducible bit for bit.
pub fn sym_eig(c: &Matrix) -> Result<SymEigen> {
    let n = c.rows();
    if c.cols() != n {
        return Err(Error::invalid(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            c.rows(),
            c.cols()
        )));
    }
    if !c.is_finite() {
        return Err(Error::invalid("eigendecomposition input contains non-finite values"));
    }
    let scale = c.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if (c[(i, j)] - c[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    c[(i, j)],
                    c[(j, i)]
                )));
            }
        }
    }

    let mut a = c.clone();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off == 0.0 || off.sqrt() <= f64::EPSILON * 1e-3 * diag.sqrt() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cos * akp - sin * akq;
                    a[(k, q)] = sin * akp + cos * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cos * apk - sin * aqk;
                    a[(q, k)] = sin * apk + cos * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cos * vkp - sin * vkq;
                    v[(k, q)] = sin * vkp + cos * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the original index order among exact ties
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));

    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        let mut pivot = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (i, x) in col.into_iter().enumerate() {
            vectors[(i, dst)] = x;
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Settings for [`gauss_newton`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussNewtonOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for GaussNewtonOptions {
    fn default() -> Self {
        GaussNewtonOptions {
            max_iter: 500,
            tol: 1e-12,
        }
    }
}

/// Outcome of a damped Gauss-Newton run.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussNewtonResult {
    pub params: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Half sum of squared residuals at `params`.
    pub cost: f64,
    /// Cost at the start and after every accepted step.
    pub cost_history: Vec<f64>,
}

const INITIAL_DAMPING: f64 = 1e-3;
const MAX_DAMPING: f64 = 1e20;

fn half_sq(r: &[f64]) -> f64 {
    0.5 * dot(r, r)
}

/// Levenberg-damped Gauss-Newton minimisation of `½‖r(p)‖²`.
///
/// The damping starts at `1e-3`, is multiplied by 10 after a rejected step
/// and divided by 10 after an accepted one. Damping is applied to the
/// Jacobian column scales (floored so that flat directions still get
/// regularised). Each step solves the augmented linear least-squares system
/// instead of the normal equations.
///
/// The run stops as converged when the step norm drops below
/// `tol·(‖p‖ + tol)` or an accepted step lowers the cost by less than
/// `tol·cost`. Hitting `max_iter` first returns the best point with
/// `converged == false`.
pub fn gauss_newton<R, J>(
    residual_fn: R,
    jacobian_fn: J,
    init: &[f64],
    opts: GaussNewtonOptions,
) -> Result<GaussNewtonResult>
where
    R: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Matrix,
{
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("gauss-newton initial parameters must be finite"));
    }
    let mut params = init.to_vec();
    let mut r = residual_fn(&params);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("residual is not finite at the initial parameters"));
    }
    let mut cost = half_sq(&r);
    let mut history = vec![cost];
    let np = params.len();
    let mut damping = INITIAL_DAMPING;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = jacobian_fn(&params);
        if jac.rows() != r.len() || jac.cols() != np {
            return Err(Error::DimensionMismatch {
                what: "jacobian shape",
                expected: r.len() * np,
                found: jac.rows() * jac.cols(),
            });
        }
        if !jac.is_finite() {
            return Err(Error::Numerical("jacobian is not finite".into()));
        }
        let col_scale: Vec<f64> = (0..np).map(|j| norm(&jac.column(j))).collect();
        let max_scale = col_scale.iter().fold(0.0_f64, |m, &v| m.max(v));
        let floor = (max_scale * 1e-8).max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while !accepted {
            let m = r.len();
            let mut aug = Matrix::zeros(m + np, np);
            let mut rhs = vec![0.0; m + np];
            for i in 0..m {
                for j in 0..np {
                    aug[(i, j)] = jac[(i, j)];
                }
                rhs[i] = -r[i];
            }
            let sd = damping.sqrt();
            for j in 0..np {
                aug[(m + j, j)] = sd * col_scale[j].max(floor);
            }
            let step = lstsq(&aug, &rhs)?;
            let step_norm = norm(&step);
            if step_norm <= opts.tol * (norm(&params) + opts.tol) {
                converged = true;
                break;
            }
            let trial: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p + s).collect();
            let r_trial = residual_fn(&trial);
            let trial_cost = if r_trial.iter().all(|v| v.is_finite()) {
                half_sq(&r_trial)
            } else {
                f64::INFINITY
            };
            if trial_cost < cost {
                let decrease = cost - trial_cost;
                params = trial;
                r = r_trial;
                let small = decrease <= opts.tol * cost;
                cost = trial_cost;
                history.push(cost);
                damping = (damping / 10.0).max(1e-15);
                accepted = true;
                if small {
                    converged = true;
                }
            } else {
                damping *= 10.0;
                if damping > MAX_DAMPING {
                    converged = true;
                    break;
                }
            }
        }
        if converged {
            break;
        }
    }

    Ok(GaussNewtonResult {
        params,
        converged,
        iterations,
        cost,
        cost_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_basic() {
        assert_eq!(linspace(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = linspace(0.01, 0.99, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[19], 0.99);
        for w in g.windows(2) {
            assert!((w[1] - w[0] - 0.98 / 19.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linspace_rejects_bad_input() {
        assert!(matches!(linspace(5.0, 5.0, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(linspace(0.0, 1.0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn lstsq_identity_and_line() {
        let c = lstsq(&Matrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        for (a, b) in c.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let a = vandermonde(&[0.0, 1.0, 2.0], 1);
        let c = lstsq(&a, &[1.0, 3.0, 5.0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_recovers_cubic() {
        let x = linspace(0.01, 0.99, 20).unwrap();
        let y: Vec<f64> = x.iter().map(|x| 2.0 - x + 0.5 * x.powi(3)).collect();
        let c = lstsq(&vandermonde(&x, 3), &y).unwrap();
        for (a, b) in c.iter().zip([2.0, -1.0, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn lstsq_minimum_norm_on_duplicate_columns() {
        // columns 0 and 1 identical: any split of 2 works, min-norm is (1, 1)
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]).unwrap();
        let c = lstsq(&a, &[2.0, 4.0, 6.0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12, "{c:?}");
    }

    #[test]
    fn lstsq_wide_system_is_minimum_norm() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let c = lstsq(&a, &[3.0]).unwrap();
        for v in c {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lstsq_dimension_mismatch() {
        assert!(matches!(
            lstsq(&Matrix::identity(3), &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sym_eig_diagonal() {
        let e = sym_eig(&Matrix::from_diag(&[1.0, 4.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![4.0, 2.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn sym_eig_two_by_two() {
        let c = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eig(&c).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert!((v0[0] - h).abs() < 1e-12 && (v0[1] - h).abs() < 1e-12);
        // first entry is the (tied) largest magnitude, so it is positive
        assert!((v1[0] - h).abs() < 1e-12 && (v1[1] + h).abs() < 1e-12);
    }

    #[test]
    fn sym_eig_zero_matrix() {
        let e = sym_eig(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let c = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn gauss_newton_linear() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let res = gauss_newton(
            |p| x.iter().zip(&y).map(|(x, y)| p[0] * x - y).collect(),
            |_| Matrix::from_columns(&[x.clone()]).unwrap(),
            &[1.0],
            GaussNewtonOptions::default(),
        )
        .unwrap();
        assert!(res.converged);
        assert!((res.params[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn gauss_newton_zero_iterations() {
        let res = gauss_newton(
            |p| vec![p[0] - 1.0],
            |_| Matrix::identity(1),
            &[5.0],
            GaussNewtonOptions { max_iter: 0, tol: 1e-12 },
        )
        .unwrap();
        assert_eq!(res.params, vec![5.0]);
        assert!(!res.converged);
    }

    #[test]
    fn gauss_newton_rejects_nonfinite_start() {
        let err = gauss_newton(
            |p| vec![p[0].ln()],
            |_| Matrix::identity(1),
            &[-1.0],
            GaussNewtonOptions::default(),
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
