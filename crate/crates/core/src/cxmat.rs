//! Minimal complex linear algebra for matrices up to 4x4.
//!
//! Just enough to carry channel matrices and beamformers through the
//! pipeline: products, Hermitian transpose, norms, a one-sided Jacobi SVD
//! and the phase normalization that pins the gauge of singular vectors.
//! Values are immutable after construction and all operations are pure.

use num_complex::Complex64;

use crate::{Error, Result};

/// Largest supported row/column count.
pub const MAX_DIM: usize = 4;

/// Dense row-major complex matrix with value semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating shape and
    /// finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!("empty matrix shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Validation(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// First `k` columns as a new matrix.
    pub fn leading_columns(&self, k: usize) -> Self {
        assert!(k <= self.cols, "leading_columns: k > cols");
        Self::from_fn(self.rows, k, |i, j| self.get(i, j))
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..self.cols {
                acc += self.get(i, p) * rhs.get(p, j);
            }
            acc
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            self.cols,
            x.len(),
            "shape mismatch in matrix-vector product"
        );
        (0..self.rows)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..self.cols {
                    acc += self.get(i, p) * x[p];
                }
                acc
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `selfH * self - I`, i.e. how far the
    /// columns are from orthonormal.
    pub fn gram_residual(&self) -> f64 {
        let gram = self.hermitian().mul(self);
        let mut worst = 0.0f64;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram.get(i, j) - target).norm());
            }
        }
        worst
    }

    /// True when every column is unit norm and mutually orthogonal within
    /// `tol`.
    pub fn has_orthonormal_columns(&self, tol: f64) -> bool {
        self.gram_residual() <= tol
    }
}

/// Singular value decomposition `a = u * diag(d) * vH` with `rank =
/// min(rows, cols)` columns retained (zeros kept for rank-deficient input).
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, `rows x rank`, orthonormal columns.
    pub u: ComplexMatrix,
    /// Singular values, descending, all nonnegative.
    pub d: Vec<f64>,
    /// Right singular vectors, `cols x rank`, orthonormal columns.
    pub v: ComplexMatrix,
}

impl SvdResult {
    /// Reconstructs `u * diag(d) * vH`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let r = self.d.len();
        ComplexMatrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..r {
                acc += self.u.get(i, k) * self.d[k] * self.v.get(j, k).conj();
            }
            acc
        })
    }
}

/// Convergence threshold for the Jacobi sweep, relative to column norms.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Singular value decomposition by one-sided Jacobi rotations on columns.
///
/// Limited to matrices up to 4x4; larger requests are a configuration
/// error. Singular values are sorted descending; equal values keep their
/// original column order.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    if a.rows() > MAX_DIM || a.cols() > MAX_DIM {
        return Err(Error::Config(format!(
            "svd supports up to {MAX_DIM}x{MAX_DIM}, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() < a.cols() {
        // Orthogonalize the transposed problem and swap the factors back.
        let t = svd(&a.hermitian())?;
        return Ok(SvdResult {
            u: t.v,
            d: t.d,
            v: t.u,
        });
    }

    let m = a.rows();
    let n = a.cols();
    // Working columns of A and the accumulated right rotations.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let app: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let aqq: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let apq: Complex64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let mag = apq.norm();
                if mag <= JACOBI_TOL * (app * aqq).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                // Dephase column q so the pair behaves like a real 2x2
                // symmetric problem, then apply the classic rotation.
                let u = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let rot = |xs: &mut Vec<Complex64>, ys: &mut Vec<Complex64>| {
                    for i in 0..xs.len() {
                        let x = xs[i];
                        let y = ys[i];
                        xs[i] = c * x - s * u.conj() * y;
                        ys[i] = s * x + c * u.conj() * y;
                    }
                };
                {
                    let (lo, hi) = cols.split_at_mut(q);
                    rot(&mut lo[p], &mut hi[0]);
                }
                {
                    let (lo, hi) = v.split_at_mut(q);
                    rot(&mut lo[p], &mut hi[0]);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; stable ordering keeps equal
    // values in original column order.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut d = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    for &j in &order {
        let sigma = norms[j];
        d.push(sigma);
        v_cols.push(v[j].clone());
        if sigma > scale * 1e-15 && sigma > 0.0 {
            u_cols.push(cols[j].iter().map(|z| z / sigma).collect());
        } else {
            u_cols.push(vec![Complex64::new(0.0, 0.0); m]);
        }
    }
    // Rank-deficient input: complete the zero u-columns to an orthonormal
    // set so downstream rotations stay unitary.
    for k in 0..n {
        if u_cols[k].iter().any(|z| z.norm_sqr() > 0.0) {
            continue;
        }
        d[k] = 0.0;
        'basis: for b in 0..m {
            let mut cand = vec![Complex64::new(0.0, 0.0); m];
            cand[b] = Complex64::new(1.0, 0.0);
            for other in u_cols.iter().take(n) {
                let proj: Complex64 = other.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                for i in 0..m {
                    cand[i] -= proj * other[i];
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for z in &mut cand {
                    *z /= norm;
                }
                u_cols[k] = cand;
                break 'basis;
            }
        }
    }

    let u = ComplexMatrix::from_fn(m, n, |i, j| u_cols[j][i]);
    let v = ComplexMatrix::from_fn(n, n, |i, j| v_cols[j][i]);
    Ok(SvdResult { u, d, v })
}

/// Magnitude below which a last-row entry is treated as zero and its
/// column's phase factor fixed to 1.
pub const PHASE_ZERO_TOL: f64 = 1e-15;

/// Rotates each column of `v` so its last row becomes real and
/// nonnegative. Returns `(v_bar, sigma)` with `v_bar = v * sigma` and
/// `sigma` diagonal unit-modulus.
pub fn phase_normalize(v: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let last = v.rows() - 1;
    let mut sigma = ComplexMatrix::identity(v.cols());
    for j in 0..v.cols() {
        let z = v.get(last, j);
        let mag = z.norm();
        if mag >= PHASE_ZERO_TOL {
            sigma.set(j, j, z.conj() / mag);
        }
    }
    (v.mul(&sigma), sigma)
}
