//! Dense and tridiagonal linear algebra used by the kernel and resolvent code.
//!
//! Everything here is deliberately small: row-major dense matrices with an
//! LU factorization, a cyclic Jacobi eigensolver for the modest symmetric
//! problems of the Krein self-test, a pivoted tridiagonal solver for the
//! finite-difference Hamiltonians, and power iteration for operator norms.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{}x{} vs {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(abs(*v)))
    }

    /// Largest |M[i,j] − M[j,i]|; zero for exactly symmetric matrices.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max(abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Relative Frobenius distance ‖a − b‖_F / max(‖b‖_F, tiny).
pub fn relative_frobenius(a: &Matrix, b: &Matrix) -> Result<f64> {
    let diff = a.sub(b)?.frobenius_norm();
    Ok(diff / b.frobenius_norm().max(f64::MIN_POSITIVE))
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch(alloc::format!(
                "LU needs a square matrix, got {}x{}",
                a.rows,
                a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut p = k;
            let mut best = abs(lu[k * n + k]);
            for i in (k + 1)..n {
                let v = abs(lu[i * n + k]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-15 * n as f64 {
                return Err(Error::NotInvertible(alloc::format!(
                    "zero pivot {best:e} in column {k}"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, swaps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `X` from `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.n, b.cols);
        let mut col = vec![0.0; self.n];
        for j in 0..b.cols {
            for i in 0..self.n {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col);
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Matrix {
        self.solve_matrix(&Matrix::identity(self.n))
    }

    pub fn determinant(&self) -> f64 {
        let mut det = if self.swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        for i in 0..self.n {
            det *= self.lu[i * self.n + i];
        }
        det
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors as
/// the columns of the returned matrix.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch("eigen-decomposition needs a square matrix".into()));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if sqrt(off) <= 1e-15 * scale {
            break;
        }
        if sweep == 99 {
            return Err(Error::NonConvergence {
                iterations: 100,
                change: sqrt(off) / scale,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if abs(apq) <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = crate::math::signum(theta).max(0.0) * 2.0 - 1.0;
                let t = t / (abs(theta) + sqrt(theta * theta + 1.0));
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Singular values of a (small) dense matrix, ascending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let gram = a.transpose().matmul(a)?;
    let (values, _) = symmetric_eigen(&gram)?;
    Ok(values.into_iter().map(|v| sqrt(v.max(0.0))).collect())
}

/// Symmetric tridiagonal matrix stored by its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if !diag.is_empty() && off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "tridiagonal with {} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (abs(self.diag[i]) + abs(x)).max(1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += abs(self.off[i - 1]);
            }
            if i + 1 < n {
                r += abs(self.off[i]);
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The k-th smallest eigenvalue (k = 0 is the ground state) by bisection.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::domain(alloc::format!(
                "eigenvalue index {k} out of range for dimension {}",
                self.dim()
            )));
        }
        let (mut lo, mut hi) = self.gershgorin();
        let scale = abs(lo).max(abs(hi)).max(1.0);
        for _ in 0..200 {
            if hi - lo <= tol * scale {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Factors `self + shift·I` for repeated solves.
    pub fn factor_shifted(&self, shift: f64) -> Result<TridiagLu> {
        let diag: Vec<f64> = self.diag.iter().map(|d| d + shift).collect();
        TridiagLu::factor(&self.off, &diag, &self.off)
    }
}

/// LU factorization of a general tridiagonal matrix with partial pivoting
/// (the `gttrf` scheme: one extra super-diagonal of fill).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    pivot_swapped: Vec<bool>,
}

impl TridiagLu {
    /// `lower[i] = A[i+1,i]`, `diag[i] = A[i,i]`, `upper[i] = A[i,i+1]`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::DimensionMismatch("tridiagonal factor shapes".into()));
        }
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut pivot_swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if abs(d[i]) >= abs(dl[i]) {
                if d[i] == 0.0 {
                    return Err(Error::NotInvertible(alloc::format!("zero pivot at row {i}")));
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                pivot_swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            return Err(Error::NotInvertible("zero pivot in last row".into()));
        }
        Ok(Self {
            dl,
            d,
            du,
            du2,
            pivot_swapped,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n.saturating_sub(1) {
            if self.pivot_swapped[i] {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// A linear map that can be applied together with its transpose.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for Matrix {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_transpose(x, y)
    }
}

/// Stopping rule for [`power_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Relative change of the Rayleigh quotient that counts as converged.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            max_iter: 50_000,
            seed: 0x5eed_c0de,
        }
    }
}

/// Largest singular value of `op` by power iteration on `opᵀ op`.
///
/// The start vector is drawn from a seeded generator, so repeated calls give
/// bit-identical results.
pub fn power_norm(op: &impl LinearOperator, opts: PowerIteration) -> Result<f64> {
    let n = op.ncols();
    let m = op.nrows();
    if n == 0 || m == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; m];
    let mut prev = 0.0;
    normalize(&mut x);
    for it in 0..opts.max_iter {
        op.apply(&x, &mut y);
        let sigma2: f64 = y.iter().map(|v| v * v).sum();
        if sigma2 == 0.0 {
            if it == 0 {
                // Random start orthogonal to the range is measure-zero; treat as zero map.
                return Ok(0.0);
            }
            return Ok(0.0);
        }
        op.apply_transpose(&y, &mut x);
        normalize(&mut x);
        let change = abs(sigma2 - prev) / sigma2;
        if it > 2 && change <= opts.rel_tol {
            return Ok(sqrt(sigma2));
        }
        prev = sigma2;
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        change: f64::NAN,
    })
}

/// Largest singular value of `op` by Lanczos iteration on `opᵀ op` with
/// full reorthogonalization.
///
/// Converges in far fewer products than [`power_norm`] when the top of the
/// spectrum is clustered. Uses the same seeded start vector.
pub fn lanczos_norm(op: &impl LinearOperator, opts: PowerIteration) -> Result<f64> {
    let n = op.ncols();
    let m = op.nrows();
    if n == 0 || m == 0 {
        return Ok(0.0);
    }
    let max_steps = n.min(opts.max_iter).min(400);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut y = vec![0.0; m];
    let mut w = vec![0.0; n];
    let mut prev = 0.0;
    for k in 0..max_steps {
        op.apply(&q, &mut y);
        op.apply_transpose(&y, &mut w);
        let a: f64 = w.iter().zip(&q).map(|(x, v)| x * v).sum();
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(x, v)| x * v).sum();
                w.iter_mut().zip(b).for_each(|(x, v)| *x -= c * v);
            }
        }
        let bnorm = sqrt(w.iter().map(|v| v * v).sum());
        let t = SymTridiagonal::new(alpha.clone(), beta.clone())?;
        let theta = t.eigenvalue(k, 1e-15)?;
        if theta <= 0.0 && k == 0 && bnorm == 0.0 {
            return Ok(0.0);
        }
        let change = abs(theta - prev) / theta.abs().max(f64::MIN_POSITIVE);
        if (k > 1 && change <= opts.rel_tol) || bnorm <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE) {
            return Ok(sqrt(theta.max(0.0)));
        }
        prev = theta;
        beta.push(bnorm);
        q.iter_mut().zip(&w).for_each(|(x, v)| *x = v / bnorm);
    }
    if max_steps == n {
        return Ok(sqrt(prev.max(0.0)));
    }
    Err(Error::NonConvergence {
        iterations: max_steps,
        change: f64::NAN,
    })
}

fn normalize(x: &mut [f64]) {
    let n = sqrt(x.iter().map(|v| v * v).sum());
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Operator built from closures; convenient for matrix-free resolvents.
pub struct FnOperator<F, G> {
    pub rows: usize,
    pub cols: usize,
    pub forward: F,
    pub transpose: G,
}

impl<F, G> LinearOperator for FnOperator<F, G>
where
    F: Fn(&[f64], &mut [f64]),
    G: Fn(&[f64], &mut [f64]),
{
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.forward)(x, y)
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        (self.transpose)(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lu_inverse_and_determinant() {
        let a = Matrix::from_row_major(3, 3, vec![4.0, 1.0, 2.0, 0.5, 3.0, 1.0, 2.0, 1.0, 5.0]).unwrap();
        let lu = Lu::factor(&a).unwrap();
        let inv = lu.inverse();
        let prod = a.matmul(&inv).unwrap();
        assert!(relative_frobenius(&prod, &Matrix::identity(3)).unwrap() < 1e-14);
        // det computed by cofactor expansion
        let det = 4.0 * (15.0 - 1.0) - 1.0 * (2.5 - 2.0) + 2.0 * (0.5 - 6.0);
        assert_relative_eq!(lu.determinant(), det, max_relative = 1e-13);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(Lu::factor(&a), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // 1D Dirichlet Laplacian: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 12;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let (vals, vecs) = symmetric_eigen(&t.to_dense()).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * crate::math::cos((k + 1) as f64 * crate::math::PI / (n + 1) as f64);
            assert_relative_eq!(*v, exact, epsilon = 1e-12);
        }
        let recon = vecs
            .matmul(&Matrix::from_diagonal(&vals))
            .unwrap()
            .matmul(&vecs.transpose())
            .unwrap();
        assert!(relative_frobenius(&recon, &t.to_dense()).unwrap() < 1e-13);
    }

    #[test]
    fn sturm_bisection_matches_jacobi() {
        let n = 20;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * i as f64 - if i == 7 { 6.0 } else { 0.0 }).collect();
        let t = SymTridiagonal::new(diag, vec![-1.3; n - 1]).unwrap();
        let (vals, _) = symmetric_eigen(&t.to_dense()).unwrap();
        for k in [0, 1, 5, n - 1] {
            assert_relative_eq!(t.eigenvalue(k, 1e-15).unwrap(), vals[k], epsilon = 1e-11);
        }
    }

    #[test]
    fn tridiagonal_solver_with_pivoting() {
        // Indefinite system that forces row swaps.
        let lower = [3.0, -2.0, 1.0, 4.0];
        let diag = [0.1, -1.0, 0.2, 2.0, -0.5];
        let upper = [1.0, 5.0, -3.0, 0.7];
        let lu = TridiagLu::factor(&lower, &diag, &upper).unwrap();
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut b = [0.0; 5];
        for i in 0..5 {
            b[i] = diag[i] * x_true[i];
            if i > 0 {
                b[i] += lower[i - 1] * x_true[i - 1];
            }
            if i < 4 {
                b[i] += upper[i] * x_true[i + 1];
            }
        }
        lu.solve_in_place(&mut b);
        for i in 0..5 {
            assert_relative_eq!(b[i], x_true[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn lanczos_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Matrix::from_fn(30, 20, |_, _| rng.gen_range(-1.0..1.0));
        let a = power_norm(&m, PowerIteration::default()).unwrap();
        let b = lanczos_norm(&m, PowerIteration::default()).unwrap();
        let (vals, _) = symmetric_eigen(&m.transpose().matmul(&m).unwrap()).unwrap();
        assert_relative_eq!(b, sqrt(vals[19]), max_relative = 1e-12);
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }

    #[test]
    fn power_norm_of_diagonal_and_rank_one() {
        let d = Matrix::from_diagonal(&[0.5, -3.0, 2.0]);
        assert_relative_eq!(power_norm(&d, PowerIteration::default()).unwrap(), 3.0, max_relative = 1e-9);
        let u = [1.0, 2.0, -1.0];
        let v = [0.5, 0.5];
        let r1 = Matrix::from_fn(3, 2, |i, j| u[i] * v[j]);
        let expect = sqrt(6.0) * sqrt(0.5);
        assert_relative_eq!(power_norm(&r1, PowerIteration::default()).unwrap(), expect, max_relative = 1e-10);
    }
}
