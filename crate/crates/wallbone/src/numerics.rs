//! Dense linear algebra for symmetric positive definite systems.
//!
//! Everything the GP training and prediction paths need: a row-major
//! [`Matrix`], Cholesky factorization with an adaptive-jitter retry,
//! triangular solves, log-determinants and SPD inverses computed from a
//! factor. Sized for kernel matrices of a few hundred rows; no sparse or
//! blocked variants.

use thiserror::Error;

/// Relative tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Jitter schedule for ill-conditioned kernel matrices: start at
/// `1e-10 * mean(diag)` and grow by 10x up to `1e-4 * mean(diag)`.
const JITTER_START_FACTOR: f64 = 1e-10;
const JITTER_MAX_FACTOR: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix is not positive definite: pivot {index} = {value:.6e}")]
    NotPositiveDefinite { index: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factor has non-positive diagonal entry at index {index}")]
    NonPositiveDiagonal { index: usize },
    #[error("matrix is not symmetric within tolerance at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
}

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(cols >= 1, "matrix needs at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Contiguous view of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if (a - b).abs() > rel_tol * a.abs().max(b.abs()).max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn mean_diagonal(&self) -> f64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.get(i, i)).sum::<f64>() / n as f64
    }

    /// A + shift * I, returned as a new matrix.
    pub fn add_diagonal(&self, shift: f64) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = out.get(i, i) + shift;
            out.set(i, i, v);
        }
        out
    }
}

/// Cholesky factorization `A = L * L^T` of a symmetric positive definite
/// matrix, returning the lower-triangular factor.
///
/// Fails with [`NumericsError::NotPositiveDefinite`] when a pivot is not
/// strictly positive, which for kernel matrices signals ill-conditioning;
/// callers should retry through [`cholesky_with_jitter`].
pub fn cholesky_factor(a: &Matrix) -> Result<Matrix, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        let (mut bi, mut bj) = (0, 0);
        let mut worst = 0.0;
        for i in 0..a.rows() {
            for j in 0..i {
                let d = (a.get(i, j) - a.get(j, i)).abs();
                if d > worst {
                    worst = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        return Err(NumericsError::NotSymmetric { i: bi, j: bj });
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            // Rows of L are contiguous, so this dot product streams well.
            let ri = l.row(i);
            let rj = l.row(j);
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(NumericsError::NotPositiveDefinite { index: i, value: s });
                }
                l.set(i, i, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Cholesky factorization with the adaptive-jitter retry: on failure the
/// diagonal is inflated starting at `1e-10 * mean(diag)` and growing by 10x
/// per attempt up to `1e-4 * mean(diag)`.
///
/// Returns the factor together with the jitter that was actually applied
/// (0.0 when the plain factorization succeeded).
pub fn cholesky_with_jitter(a: &Matrix) -> Result<(Matrix, f64), NumericsError> {
    match cholesky_factor(a) {
        Ok(l) => return Ok((l, 0.0)),
        Err(e @ NumericsError::DimensionMismatch(_)) => return Err(e),
        Err(e @ NumericsError::NotSymmetric { .. }) => return Err(e),
        Err(_) => {}
    }
    let base = a.mean_diagonal().abs().max(f64::MIN_POSITIVE);
    let mut factor = JITTER_START_FACTOR;
    let mut last_err = None;
    while factor <= JITTER_MAX_FACTOR * 1.0001 {
        let jitter = factor * base;
        match cholesky_factor(&a.add_diagonal(jitter)) {
            Ok(l) => return Ok((l, jitter)),
            Err(e) => last_err = Some(e),
        }
        factor *= 10.0;
    }
    Err(last_err.expect("at least one jittered attempt"))
}

/// Solves `(L * L^T) x = b` given the lower-triangular Cholesky factor.
pub fn solve_spd(l: &Matrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    let n = l.rows();
    if !l.is_square() || b.len() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "solve_spd: factor is {}x{}, rhs has length {}",
            l.rows(),
            l.cols(),
            b.len()
        )));
    }
    // Forward substitution L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let ri = l.row(i);
        let mut s = b[i];
        for k in 0..i {
            s -= ri[k] * y[k];
        }
        y[i] = s / ri[i];
    }
    // Back substitution L^T x = y.
    let mut x = y;
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

/// `log det(A) = 2 * sum(log L_ii)` from the Cholesky factor of `A`.
pub fn log_det_from_factor(l: &Matrix) -> Result<f64, NumericsError> {
    let mut acc = 0.0;
    for i in 0..l.rows().min(l.cols()) {
        let d = l.get(i, i);
        if d <= 0.0 || !d.is_finite() {
            return Err(NumericsError::NonPositiveDiagonal { index: i });
        }
        acc += d.ln();
    }
    Ok(2.0 * acc)
}

/// Explicit `A^{-1}` from the Cholesky factor of `A`, via the triangular
/// inverse: `A^{-1} = L^{-T} L^{-1}`. Needed by the marginal-likelihood
/// gradient, which contracts the inverse against kernel derivatives.
pub fn spd_inverse_from_factor(l: &Matrix) -> Matrix {
    let n = l.rows();
    // Lower-triangular inverse.
    let mut li = Matrix::zeros(n, n);
    for i in 0..n {
        li.set(i, i, 1.0 / l.get(i, i));
        for j in 0..i {
            let ri = l.row(i);
            let mut s = 0.0;
            for k in j..i {
                s += ri[k] * li.get(k, j);
            }
            li.set(i, j, -s / ri[i]);
        }
    }
    // A^{-1}[i][j] = sum_{k >= max(i,j)} Li[k][i] * Li[k][j]; fill symmetric.
    let mut inv = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..n {
                s += li.get(k, i) * li.get(k, j);
            }
            inv.set(i, j, s);
            inv.set(j, i, s);
        }
    }
    inv
}
