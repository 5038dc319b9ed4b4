//! Invertible output transformations and feature standardization.
//!
//! The Box-Cox family maps skewed positive data toward normality:
//! `z = ((y + shift)^lambda - 1) / lambda` for `lambda != 0` and
//! `z = log(y + shift)` at `lambda = 0`. The optimal `lambda` is selected by
//! maximizing the profile log-likelihood (Gaussian likelihood of the
//! transformed data plus the `(lambda - 1) * sum(log y)` Jacobian term) on a
//! grid over `[-5, 5]`, then refining with golden-section search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::Matrix;

pub const LAMBDA_MIN: f64 = -5.0;
pub const LAMBDA_MAX: f64 = 5.0;
const GRID_STEPS: i64 = 1000; // 0.01 spacing over [-5, 5]
const REFINE_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("input {0} is not positive after shift; Box-Cox requires y + shift > 0")]
    NonPositiveInput(f64),
    #[error("value {value} is outside the inverse Box-Cox domain (lambda = {lambda})")]
    OutOfDomain { value: f64, lambda: f64 },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A fitted Box-Cox transformation: exponent `lambda` in `[-5, 5]` and a
/// non-negative `shift` applied before the power so all inputs are positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxTransform {
    pub lambda: f64,
    pub shift: f64,
}

impl BoxCoxTransform {
    /// The identity-like member of the family (`lambda = 1`, no shift);
    /// used when output transformation is disabled. It only recenters by 1,
    /// which a zero-mean GP prior absorbs.
    pub fn identity() -> Self {
        BoxCoxTransform { lambda: 1.0, shift: 0.0 }
    }

    pub fn forward(&self, y: f64) -> Result<f64, TransformError> {
        let v = y + self.shift;
        if v <= 0.0 || !v.is_finite() {
            return Err(TransformError::NonPositiveInput(y));
        }
        if self.lambda == 0.0 {
            Ok(v.ln())
        } else if self.lambda == 1.0 {
            // The identity-like member stays exact.
            Ok(v - 1.0)
        } else {
            // exp_m1 keeps precision for |lambda| near zero.
            Ok((self.lambda * v.ln()).exp_m1() / self.lambda)
        }
    }

    pub fn inverse(&self, z: f64) -> Result<f64, TransformError> {
        if self.lambda == 0.0 {
            return Ok(z.exp() - self.shift);
        }
        if self.lambda == 1.0 {
            return Ok(z + 1.0 - self.shift);
        }
        let u = self.lambda * z;
        if u <= -1.0 || !u.is_finite() {
            return Err(TransformError::OutOfDomain { value: z, lambda: self.lambda });
        }
        Ok((u.ln_1p() / self.lambda).exp() - self.shift)
    }

    pub fn forward_slice(&self, ys: &[f64]) -> Result<Vec<f64>, TransformError> {
        ys.iter().map(|&y| self.forward(y)).collect()
    }
}

/// Profile log-likelihood of the Box-Cox parameter on shifted data:
/// `-(n/2) * ln(sigma_mle^2(z)) + (lambda - 1) * sum(ln(y + shift))`.
pub fn boxcox_profile_loglik(y: &[f64], shift: f64, lambda: f64) -> f64 {
    let t = BoxCoxTransform { lambda, shift };
    let n = y.len() as f64;
    let mut z = Vec::with_capacity(y.len());
    for &v in y {
        match t.forward(v) {
            Ok(w) => z.push(w),
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 || !var.is_finite() {
        return f64::NEG_INFINITY;
    }
    let log_jacobian: f64 = y.iter().map(|&v| (v + shift).ln()).sum();
    -0.5 * n * var.ln() + (lambda - 1.0) * log_jacobian
}

/// Selects the Box-Cox `lambda` maximizing the profile log-likelihood.
///
/// The shift is `max(0, 1e-6 * range(y) - min(y))`, which leaves already
/// positive data untouched and lifts zero or negative values just above zero.
/// Search: grid over `[-5, 5]` with 0.01 spacing, then golden-section
/// refinement of the winning cell down to 1e-4.
pub fn fit_lambda(y: &[f64]) -> Result<BoxCoxTransform, TransformError> {
    if y.len() < 3 {
        return Err(TransformError::DegenerateData(format!(
            "need at least 3 values to fit lambda, got {}",
            y.len()
        )));
    }
    let min = y.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return Err(TransformError::DegenerateData("non-finite values".into()));
    }
    let range = max - min;
    if range == 0.0 {
        return Err(TransformError::DegenerateData("constant data".into()));
    }
    let shift = (1e-6 * range - min).max(0.0);

    let mut best_i = 0;
    let mut best_ll = f64::NEG_INFINITY;
    for i in 0..=GRID_STEPS {
        let lambda = (i - GRID_STEPS / 2) as f64 / 100.0;
        let ll = boxcox_profile_loglik(y, shift, lambda);
        if ll > best_ll {
            best_ll = ll;
            best_i = i;
        }
    }
    let lo = ((best_i - 1).max(0) - GRID_STEPS / 2) as f64 / 100.0;
    let hi = ((best_i + 1).min(GRID_STEPS) - GRID_STEPS / 2) as f64 / 100.0;
    let lambda = golden_section_max(|l| boxcox_profile_loglik(y, shift, l), lo, hi, REFINE_TOL);
    // Snap to exactly zero when the refined optimum is within grid noise of
    // the log case; keeps the lambda = 0 branch reachable.
    let lambda = if lambda.abs() < REFINE_TOL { 0.0 } else { lambda };
    Ok(BoxCoxTransform { lambda, shift })
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Per-feature affine standardization fitted on training data: subtract the
/// mean, divide by the sample standard deviation (n-1 convention). Degenerate
/// features keep scale 1 so they pass through as zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.rows();
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (j, m) in mean.iter_mut().enumerate() {
                *m += x.get(i, j);
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut scale = vec![1.0; d];
        if n > 1 {
            for (j, s) in scale.iter_mut().enumerate() {
                let ss: f64 = (0..n).map(|i| (x.get(i, j) - mean[j]).powi(2)).sum();
                let sd = (ss / (n - 1) as f64).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    *s = sd;
                }
            }
        }
        Standardizer { mean, scale }
    }

    pub fn from_stats(mean: Vec<f64>, scale: Vec<f64>) -> Result<Self, TransformError> {
        if mean.len() != scale.len() {
            return Err(TransformError::DimensionMismatch(
                "mean and scale lengths differ".into(),
            ));
        }
        if scale.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
            return Err(TransformError::DegenerateData("scale entries must be > 0".into()));
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix, TransformError> {
        self.check_cols(x.cols())?;
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            (x.get(i, j) - self.mean[j]) / self.scale[j]
        }))
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>, TransformError> {
        self.check_cols(row.len())?;
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect())
    }

    pub fn invert(&self, x: &Matrix) -> Result<Matrix, TransformError> {
        self.check_cols(x.cols())?;
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| {
            x.get(i, j) * self.scale[j] + self.mean[j]
        }))
    }

    fn check_cols(&self, cols: usize) -> Result<(), TransformError> {
        if cols != self.mean.len() {
            return Err(TransformError::DimensionMismatch(format!(
                "standardizer fitted on {} features, got {}",
                self.mean.len(),
                cols
            )));
        }
        Ok(())
    }
}
