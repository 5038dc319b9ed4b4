//! Gaussian process regression with a squared-exponential ARD kernel.
//!
//! The kernel is `k(x_i, x_j) = sigma_f^2 * exp(-1/2 * sum_d (x_id - x_jd)^2 / l_d^2)`
//! with one lengthscale per input feature, so the inverse lengthscales double
//! as feature-relevance scores. Training maximizes the exact log marginal
//! likelihood
//!
//! ```text
//! log p(y | X, theta) = -1/2 y^T K_y^{-1} y - 1/2 log|K_y| - n/2 log(2 pi)
//! ```
//!
//! with `K_y = K + sigma_n^2 I`, using analytic gradients
//! `1/2 tr((alpha alpha^T - K_y^{-1}) dK_y/dtheta)` in log-parameter space and
//! a quasi-Newton optimizer with random restarts ([`optimize`]).
//!
//! [`GprModel`] wraps the exact-inference core with the full per-output
//! pipeline: feature standardization, Box-Cox target transformation, and
//! target centering, so predictions come back in physical units.

mod optimize;
mod persist;

pub use optimize::{optimize_hyperparameters, OptimizerConfig};
pub use persist::MODEL_SCHEMA_VERSION;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    cholesky_with_jitter, log_det_from_factor, solve_spd, spd_inverse_from_factor, Matrix,
    NumericsError,
};
use crate::transforms::{fit_lambda, BoxCoxTransform, Standardizer, TransformError};

const LN_2PI: f64 = 1.837877066409345; // ln(2*pi)

#[derive(Debug, Error)]
pub enum GprError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("too few training points: {0} (need at least 2)")]
    TooFewPoints(usize),
    #[error("hyperparameter optimization diverged: {0}")]
    OptimizationDiverged(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("model io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model document parse: {0}")]
    Parse(String),
    #[error("unsupported model schema version {found} (this build reads version {supported})")]
    SchemaVersion { found: u32, supported: u32 },
}

/// SE-ARD kernel hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Output scale sigma_f^2.
    pub signal_variance: f64,
    /// One positive lengthscale per input feature.
    pub lengthscales: Vec<f64>,
    /// Observation noise sigma_n^2 (>= 0).
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn isotropic(dim: usize, lengthscale: f64, signal_variance: f64, noise_variance: f64) -> Self {
        KernelParams {
            signal_variance,
            lengthscales: vec![lengthscale; dim],
            noise_variance,
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<(), GprError> {
        if self.lengthscales.is_empty() {
            return Err(GprError::InvalidParams("no lengthscales".into()));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(GprError::InvalidParams(format!(
                "signal variance must be > 0, got {}",
                self.signal_variance
            )));
        }
        if self.lengthscales.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(GprError::InvalidParams("lengthscales must be > 0".into()));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(GprError::InvalidParams(format!(
                "noise variance must be >= 0, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }

    /// Log-space view `[ln l_1 .. ln l_d, ln sigma_f^2, ln sigma_n^2]`;
    /// the order the likelihood gradient uses.
    pub fn to_log(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lengthscales.iter().map(|l| l.ln()).collect();
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.max(f64::MIN_POSITIVE).ln());
        v
    }

    pub fn from_log(theta: &[f64]) -> Self {
        let d = theta.len() - 2;
        KernelParams {
            signal_variance: theta[d].exp(),
            lengthscales: theta[..d].iter().map(|t| t.exp()).collect(),
            noise_variance: theta[d + 1].exp(),
        }
    }
}

/// SE-ARD kernel value for one pair of points.
pub fn se_ard_kernel(x_i: &[f64], x_j: &[f64], params: &KernelParams) -> Result<f64, GprError> {
    let d = params.dim();
    if x_i.len() != d || x_j.len() != d {
        return Err(GprError::Dimension(format!(
            "kernel inputs have lengths {} and {}, params expect {}",
            x_i.len(),
            x_j.len(),
            d
        )));
    }
    let mut s = 0.0;
    for k in 0..d {
        let r = (x_i[k] - x_j[k]) / params.lengthscales[k];
        s += r * r;
    }
    Ok(params.signal_variance * (-0.5 * s).exp())
}

/// Kernel matrix `K(X, X)`, optionally with `sigma_n^2` added on the diagonal.
pub fn covariance_matrix(x: &Matrix, params: &KernelParams, add_noise: bool) -> Result<Matrix, GprError> {
    if x.cols() != params.dim() {
        return Err(GprError::Dimension(format!(
            "inputs have {} features, params expect {}",
            x.cols(),
            params.dim()
        )));
    }
    let n = x.rows();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = se_ard_kernel(x.row(i), x.row(j), params)?;
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    if add_noise {
        for i in 0..n {
            let v = k.get(i, i) + params.noise_variance;
            k.set(i, i, v);
        }
    }
    Ok(k)
}

/// Precomputed squared distances for repeated likelihood evaluations on one
/// training set. Packed lower triangle, feature-contiguous per pair.
pub(crate) struct LmlProblem<'a> {
    x_rows: usize,
    dim: usize,
    sqdist: Vec<f64>,
    y: &'a [f64],
}

impl<'a> LmlProblem<'a> {
    pub fn new(x: &Matrix, y: &'a [f64]) -> Self {
        let n = x.rows();
        let d = x.cols();
        let mut sqdist = vec![0.0; n * (n + 1) / 2 * d];
        for i in 0..n {
            for j in 0..=i {
                let base = (i * (i + 1) / 2 + j) * d;
                let (ri, rj) = (x.row(i), x.row(j));
                for k in 0..d {
                    let diff = ri[k] - rj[k];
                    sqdist[base + k] = diff * diff;
                }
            }
        }
        LmlProblem { x_rows: n, dim: d, sqdist, y }
    }

    fn build_kernel(&self, params: &KernelParams) -> Matrix {
        let n = self.x_rows;
        let d = self.dim;
        let inv_l2: Vec<f64> = params.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let base = (i * (i + 1) / 2 + j) * d;
                let mut s = 0.0;
                for (kk, inv) in inv_l2.iter().enumerate() {
                    s += self.sqdist[base + kk] * inv;
                }
                let v = params.signal_variance * (-0.5 * s).exp();
                k.set(i, j, v);
                k.set(j, i, v);
            }
        }
        k
    }

    /// Log marginal likelihood value, or None when the kernel matrix cannot
    /// be factorized even with jitter.
    pub fn value(&self, params: &KernelParams) -> Option<f64> {
        let know = self.build_kernel(params);
        let ky = know.add_diagonal(params.noise_variance);
        let (l, _) = cholesky_with_jitter(&ky).ok()?;
        let alpha = solve_spd(&l, self.y).ok()?;
        let log_det = log_det_from_factor(&l).ok()?;
        let fit: f64 = self.y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let n = self.x_rows as f64;
        let v = -0.5 * fit - 0.5 * log_det - 0.5 * n * LN_2PI;
        v.is_finite().then_some(v)
    }

    /// Value and gradient over `[ln l_1 .. ln l_d, ln sigma_f^2, ln sigma_n^2]`.
    pub fn value_and_grad(&self, params: &KernelParams) -> Option<(f64, Vec<f64>)> {
        let n = self.x_rows;
        let d = self.dim;
        let know = self.build_kernel(params);
        let ky = know.add_diagonal(params.noise_variance);
        let (l, _) = cholesky_with_jitter(&ky).ok()?;
        let alpha = solve_spd(&l, self.y).ok()?;
        let log_det = log_det_from_factor(&l).ok()?;
        let fit: f64 = self.y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
        let value = -0.5 * fit - 0.5 * log_det - 0.5 * n as f64 * LN_2PI;
        if !value.is_finite() {
            return None;
        }

        let k_inv = spd_inverse_from_factor(&l);
        let inv_l2: Vec<f64> = params.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();

        // g = 1/2 * sum_ij B_ij * dK_ij, with B = alpha alpha^T - K_y^{-1}.
        // Diagonal distance terms are zero, so lengthscale gradients only
        // need the strict lower triangle (doubled by symmetry).
        let mut grad = vec![0.0; d + 2];
        let mut off_signal = 0.0;
        for i in 0..n {
            for j in 0..i {
                let b = alpha[i] * alpha[j] - k_inv.get(i, j);
                let w = b * know.get(i, j);
                off_signal += w;
                let base = (i * (i + 1) / 2 + j) * d;
                for (kk, inv) in inv_l2.iter().enumerate() {
                    grad[kk] += w * self.sqdist[base + kk] * inv;
                }
            }
        }
        let mut trace_b = 0.0;
        for i in 0..n {
            trace_b += alpha[i] * alpha[i] - k_inv.get(i, i);
        }
        grad[d] = 0.5 * (trace_b * params.signal_variance) + off_signal;
        grad[d + 1] = 0.5 * params.noise_variance * trace_b;
        Some((value, grad))
    }
}

/// Exact log marginal likelihood and its gradient in log-hyperparameter
/// space, ordered `[lengthscales.., signal variance, noise variance]`.
pub fn log_marginal_likelihood(
    x: &Matrix,
    y: &[f64],
    params: &KernelParams,
) -> Result<(f64, Vec<f64>), GprError> {
    params.validate()?;
    if x.rows() != y.len() {
        return Err(GprError::Dimension(format!(
            "{} input rows vs {} targets",
            x.rows(),
            y.len()
        )));
    }
    if x.cols() != params.dim() {
        return Err(GprError::Dimension(format!(
            "inputs have {} features, params expect {}",
            x.cols(),
            params.dim()
        )));
    }
    LmlProblem::new(x, y)
        .value_and_grad(params)
        .ok_or_else(|| GprError::OptimizationDiverged("kernel matrix not factorizable".into()))
}

/// Posterior mean and variance at one query point, in the (transformed,
/// standardized) model space of the training targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    /// Noise-free posterior variance, clamped at zero.
    pub variance: f64,
}

/// Exact-inference core: training inputs/targets with cached Cholesky factor
/// and `alpha = K_y^{-1} y`. Immutable once fitted.
#[derive(Debug, Clone)]
pub struct GprCore {
    x: Matrix,
    params: KernelParams,
    chol: Matrix,
    alpha: Vec<f64>,
    jitter: f64,
}

impl GprCore {
    pub fn fit(x: Matrix, y: &[f64], params: KernelParams) -> Result<Self, GprError> {
        params.validate()?;
        if x.rows() != y.len() {
            return Err(GprError::Dimension(format!(
                "{} input rows vs {} targets",
                x.rows(),
                y.len()
            )));
        }
        let ky = covariance_matrix(&x, &params, true)?;
        let (chol, jitter) = cholesky_with_jitter(&ky)?;
        let alpha = solve_spd(&chol, y)?;
        Ok(GprCore { x, params, chol, alpha, jitter })
    }

    pub fn predict(&self, x_star: &[f64]) -> Result<Prediction, GprError> {
        if x_star.len() != self.x.cols() {
            return Err(GprError::Dimension(format!(
                "query has {} features, model expects {}",
                x_star.len(),
                self.x.cols()
            )));
        }
        let n = self.x.rows();
        let mut k_star = vec![0.0; n];
        for i in 0..n {
            k_star[i] = se_ard_kernel(self.x.row(i), x_star, &self.params)?;
        }
        let mean: f64 = k_star.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let v = solve_spd(&self.chol, &k_star)?;
        let quad: f64 = k_star.iter().zip(&v).map(|(a, b)| a * b).sum();
        let variance = (self.params.signal_variance - quad).max(0.0);
        Ok(Prediction { mean, variance })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn training_inputs(&self) -> &Matrix {
        &self.x
    }
}

/// How the output transformation parameter is chosen at fit time.
/// Serializes as the string `"auto"` or `"off"`, or a bare number for a
/// fixed exponent (the paper-era default for wall databases is -0.3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    /// Profile-likelihood selection on the training targets.
    Auto,
    /// A fixed exponent.
    Fixed(f64),
    /// No output transformation.
    Off,
}

impl Serialize for LambdaChoice {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            LambdaChoice::Auto => serializer.serialize_str("auto"),
            LambdaChoice::Off => serializer.serialize_str("off"),
            LambdaChoice::Fixed(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaChoice {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(v) => Ok(LambdaChoice::Fixed(v)),
        }
    }
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Auto
    }
}

impl std::str::FromStr for LambdaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(LambdaChoice::Auto),
            "off" | "none" => Ok(LambdaChoice::Off),
            other => other
                .parse::<f64>()
                .map(LambdaChoice::Fixed)
                .map_err(|_| format!("lambda must be 'auto', 'off', or a number, got '{other}'")),
        }
    }
}

/// Fit-time settings for one [`GprModel`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: LambdaChoice,
    pub optimizer: OptimizerConfig,
}

/// A fitted per-output model: standardizer, Box-Cox transform, target
/// centering, optimized kernel, and the exact-inference caches.
#[derive(Debug, Clone)]
pub struct GprModel {
    output_name: String,
    feature_names: Vec<String>,
    standardizer: Standardizer,
    transform: BoxCoxTransform,
    target_center: f64,
    target_scale: f64,
    core: GprCore,
    raw_inputs: Matrix,
    raw_targets: Vec<f64>,
}

/// A prediction mapped back to physical units. The mean is the inverse
/// Box-Cox of the posterior mean (the posterior median in physical space);
/// `std` is half the width of the mapped one-sigma interval.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalPrediction {
    pub mean: f64,
    pub std: f64,
}

impl GprModel {
    /// Fits the full pipeline on raw features and physical targets:
    /// standardize features, select and apply the output transform, center
    /// the transformed targets, then optimize the kernel hyperparameters.
    pub fn fit(
        x_raw: &Matrix,
        y_raw: &[f64],
        feature_names: &[String],
        output_name: &str,
        config: &FitConfig,
    ) -> Result<GprModel, GprError> {
        if x_raw.rows() != y_raw.len() {
            return Err(GprError::Dimension(format!(
                "{} input rows vs {} targets",
                x_raw.rows(),
                y_raw.len()
            )));
        }
        if x_raw.rows() < 2 {
            return Err(GprError::TooFewPoints(x_raw.rows()));
        }
        if feature_names.len() != x_raw.cols() {
            return Err(GprError::Dimension(format!(
                "{} feature names vs {} columns",
                feature_names.len(),
                x_raw.cols()
            )));
        }
        if y_raw.iter().any(|v| !v.is_finite()) {
            return Err(GprError::InvalidParams("targets must be finite".into()));
        }

        let standardizer = Standardizer::fit(x_raw);
        let xs = standardizer.apply(x_raw)?;

        let transform = match config.lambda {
            LambdaChoice::Auto => fit_lambda(y_raw)?,
            LambdaChoice::Fixed(lambda) => {
                let min = y_raw.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = y_raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let shift = (1e-6 * (max - min) - min).max(0.0);
                BoxCoxTransform { lambda, shift }
            }
            LambdaChoice::Off => BoxCoxTransform::identity(),
        };
        let z = transform.forward_slice(y_raw)?;
        let (center, scale) = center_scale(&z);
        let zs: Vec<f64> = z.iter().map(|v| (v - center) / scale).collect();

        let var_z = sample_variance(&zs).max(1e-12);
        let init = KernelParams {
            signal_variance: var_z,
            lengthscales: vec![1.0; x_raw.cols()],
            noise_variance: 0.1 * var_z,
        };
        let params = optimize_hyperparameters(&xs, &zs, &init, &config.optimizer)?;
        let core = GprCore::fit(xs, &zs, params)?;

        Ok(GprModel {
            output_name: output_name.to_string(),
            feature_names: feature_names.to_vec(),
            standardizer,
            transform,
            target_center: center,
            target_scale: scale,
            core,
            raw_inputs: x_raw.clone(),
            raw_targets: y_raw.to_vec(),
        })
    }

    /// Rebuilds the model with different kernel parameters on the same data
    /// and pipeline state (no re-optimization).
    pub fn refit_with_params(&self, params: KernelParams) -> Result<GprModel, GprError> {
        let core = GprCore::fit(self.core.x.clone(), &self.core_targets(), params)?;
        let mut out = self.clone();
        out.core = core;
        Ok(out)
    }

    fn core_targets(&self) -> Vec<f64> {
        // Reconstructed deterministically from the stored raw targets.
        self.raw_targets
            .iter()
            .map(|&y| (self.transform.forward(y).expect("fitted data") - self.target_center) / self.target_scale)
            .collect()
    }

    /// Posterior in the transformed, standardized model space (the space the
    /// kernel and marginal likelihood live in).
    pub fn predict_transformed(&self, x_raw: &[f64]) -> Result<Prediction, GprError> {
        let xs = self.standardizer.apply_row(x_raw)?;
        self.core.predict(&xs)
    }

    /// Physical-unit prediction via the inverse output transform.
    pub fn predict(&self, x_raw: &[f64]) -> Result<PhysicalPrediction, GprError> {
        let p = self.predict_transformed(x_raw)?;
        let z_mean = p.mean * self.target_scale + self.target_center;
        let mean = self.transform.inverse(z_mean)?;
        let sd = p.variance.sqrt();
        let z_lo = (p.mean - sd) * self.target_scale + self.target_center;
        let z_hi = (p.mean + sd) * self.target_scale + self.target_center;
        // The mapped interval can run off the transform's domain on one side
        // (large lambda * z); saturate toward the transform's limit values.
        let lo = self.transform.inverse(z_lo).unwrap_or(-self.transform.shift);
        let hi = self.transform.inverse(z_hi).unwrap_or(f64::INFINITY);
        Ok(PhysicalPrediction { mean, std: 0.5 * (hi - lo) })
    }

    /// Features ranked by relevance `1 / lengthscale`, descending; ties break
    /// toward the lower feature index.
    pub fn feature_relevance(&self) -> Vec<(usize, f64)> {
        ranking_from_lengthscales(&self.core.params.lengthscales)
    }

    pub fn params(&self) -> &KernelParams {
        &self.core.params
    }

    pub fn core(&self) -> &GprCore {
        &self.core
    }

    pub fn transform(&self) -> &BoxCoxTransform {
        &self.transform
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn target_center(&self) -> f64 {
        self.target_center
    }

    pub fn target_scale(&self) -> f64 {
        self.target_scale
    }

    pub fn output_name(&self) -> &str {
        &self.output_name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn training_size(&self) -> usize {
        self.raw_targets.len()
    }

    pub(crate) fn raw_inputs(&self) -> &Matrix {
        &self.raw_inputs
    }

    pub(crate) fn raw_targets(&self) -> &[f64] {
        &self.raw_targets
    }

    pub(crate) fn assemble(
        output_name: String,
        feature_names: Vec<String>,
        standardizer: Standardizer,
        transform: BoxCoxTransform,
        target_center: f64,
        target_scale: f64,
        params: KernelParams,
        raw_inputs: Matrix,
        raw_targets: Vec<f64>,
    ) -> Result<GprModel, GprError> {
        let xs = standardizer.apply(&raw_inputs)?;
        let z: Result<Vec<f64>, _> = raw_targets
            .iter()
            .map(|&y| transform.forward(y).map(|v| (v - target_center) / target_scale))
            .collect();
        let core = GprCore::fit(xs, &z?, params)?;
        Ok(GprModel {
            output_name,
            feature_names,
            standardizer,
            transform,
            target_center,
            target_scale,
            core,
            raw_inputs,
            raw_targets,
        })
    }
}

/// Ranking of feature indices by `1 / lengthscale`, descending, ties broken
/// by ascending index.
pub fn ranking_from_lengthscales(lengthscales: &[f64]) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = lengthscales
        .iter()
        .enumerate()
        .map(|(i, &l)| (i, 1.0 / l))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    ranked
}

fn center_scale(z: &[f64]) -> (f64, f64) {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let scale = if z.len() > 1 {
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if sd > 0.0 && sd.is_finite() {
            sd
        } else {
            1.0
        }
    } else {
        1.0
    };
    (mean, scale)
}

fn sample_variance(z: &[f64]) -> f64 {
    if z.len() < 2 {
        return 1.0;
    }
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0),
            "expected {a} ~ {b} within rel {tol}"
        );
    }

    fn params_1d() -> KernelParams {
        KernelParams::isotropic(1, 1.0, 1.0, 0.0)
    }

    #[test]
    fn kernel_at_zero_distance_is_signal_variance() {
        let p = KernelParams::isotropic(3, 0.7, 2.5, 0.1);
        let x = [0.3, -1.0, 4.0];
        assert_close(se_ard_kernel(&x, &x, &p).unwrap(), 2.5, 1e-15);
    }

    #[test]
    fn kernel_half_decay_point() {
        // exp(-1/2 * r^2) = 1/2 at r = sqrt(2 ln 2).
        let p = params_1d();
        let r = (2.0f64 * 2.0f64.ln()).sqrt();
        assert_close(se_ard_kernel(&[0.0], &[r], &p).unwrap(), 0.5, 1e-12);
        assert!((r - 1.1774).abs() < 1e-4);
    }

    #[test]
    fn kernel_decays_to_zero() {
        let p = params_1d();
        assert!(se_ard_kernel(&[0.0], &[80.0], &p).unwrap() < 1e-300);
    }

    #[test]
    fn kernel_symmetry_and_bounds() {
        let p = KernelParams {
            signal_variance: 1.7,
            lengthscales: vec![0.5, 2.0],
            noise_variance: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let b = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let kab = se_ard_kernel(&a, &b, &p).unwrap();
            let kba = se_ard_kernel(&b, &a, &p).unwrap();
            assert_eq!(kab, kba);
            assert!(kab > 0.0 && kab <= 1.7 + 1e-12);
        }
    }

    #[test]
    fn kernel_dimension_mismatch() {
        let p = params_1d();
        assert!(matches!(
            se_ard_kernel(&[0.0, 1.0], &[0.0, 1.0], &p),
            Err(GprError::Dimension(_))
        ));
    }

    #[test]
    fn covariance_single_row_with_noise() {
        let p = KernelParams::isotropic(2, 1.0, 1.5, 0.25);
        let x = Matrix::from_rows(&[vec![0.0, 0.0]]);
        let k = covariance_matrix(&x, &p, true).unwrap();
        assert_eq!(k.rows(), 1);
        assert_close(k.get(0, 0), 1.75, 1e-15);
    }

    #[test]
    fn covariance_duplicate_rows_without_noise() {
        let p = KernelParams::isotropic(2, 1.0, 2.0, 0.3);
        let x = Matrix::from_rows(&[vec![1.0, -1.0], vec![1.0, -1.0]]);
        let k = covariance_matrix(&x, &p, false).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_close(k.get(i, j), 2.0, 1e-15);
            }
        }
    }

    #[test]
    fn covariance_matches_elementwise_kernel() {
        let p = KernelParams {
            signal_variance: 0.8,
            lengthscales: vec![1.3, 0.4, 2.2],
            noise_variance: 0.05,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Matrix::from_fn(3, 3, |_, _| rng.gen_range(-2.0..2.0));
        let k = covariance_matrix(&x, &p, true).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut want = se_ard_kernel(x.row(i), x.row(j), &p).unwrap();
                if i == j {
                    want += p.noise_variance;
                }
                assert_close(k.get(i, j), want, 1e-15);
            }
        }
    }

    #[test]
    fn lml_scalar_case_matches_gaussian_density() {
        // n = 1: K_y = [v], y = (a) -> -a^2/(2v) - ln(v)/2 - ln(2 pi)/2.
        let p = KernelParams::isotropic(1, 1.0, 0.6, 0.4); // v = 1.0
        let x = Matrix::from_rows(&[vec![0.0]]);
        let a = 1.3;
        let (val, grad) = log_marginal_likelihood(&x, &[a], &p).unwrap();
        let want = -a * a / 2.0 - 0.5 * 1.0f64.ln() - 0.5 * LN_2PI;
        assert_close(val, want, 1e-12);
        assert_eq!(grad.len(), 3);
    }

    #[test]
    fn lml_zero_targets_is_pure_complexity_term() {
        let p = KernelParams::isotropic(2, 1.2, 1.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = Matrix::from_fn(5, 2, |_, _| rng.gen_range(-1.0..1.0));
        let y = vec![0.0; 5];
        let (val, _) = log_marginal_likelihood(&x, &y, &p).unwrap();
        let ky = covariance_matrix(&x, &p, true).unwrap();
        let (l, _) = cholesky_with_jitter(&ky).unwrap();
        let want = -0.5 * log_det_from_factor(&l).unwrap() - 2.5 * LN_2PI;
        assert_close(val, want, 1e-12);
    }

    #[test]
    fn lml_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for case in 0..12 {
            let n = rng.gen_range(3..=10);
            let d = rng.gen_range(1..=4);
            let x = Matrix::from_fn(n, d, |_, _| rng.gen_range(-2.0..2.0));
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let params = KernelParams {
                signal_variance: rng.gen_range(0.3..3.0),
                lengthscales: (0..d).map(|_| rng.gen_range(0.4..2.5)).collect(),
                noise_variance: rng.gen_range(0.05..0.8),
            };
            let (_, grad) = log_marginal_likelihood(&x, &y, &params).unwrap();
            let theta = params.to_log();
            for k in 0..theta.len() {
                let h = 1e-6;
                let mut tp = theta.clone();
                tp[k] += h;
                let mut tm = theta.clone();
                tm[k] -= h;
                let fp = log_marginal_likelihood(&x, &y, &KernelParams::from_log(&tp)).unwrap().0;
                let fm = log_marginal_likelihood(&x, &y, &KernelParams::from_log(&tm)).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                let err = (grad[k] - fd).abs();
                assert!(
                    err <= 1e-5 * grad[k].abs().max(fd.abs()).max(1.0),
                    "case {case} component {k}: analytic {} vs fd {fd}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn core_two_point_alpha_matches_hand_solve() {
        let params = KernelParams::isotropic(1, 1.0, 1.0, 0.5);
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let y = [1.0, -1.0];
        let core = GprCore::fit(x, &y, params.clone()).unwrap();

        // K_y = [[1.5, k], [k, 1.5]] with k = exp(-1/2).
        let k = (-0.5f64).exp();
        let det = 1.5 * 1.5 - k * k;
        let a0 = (1.5 * y[0] - k * y[1]) / det;
        let a1 = (-k * y[0] + 1.5 * y[1]) / det;
        assert_close(core.alpha()[0], a0, 1e-12);
        assert_close(core.alpha()[1], a1, 1e-12);
    }

    #[test]
    fn core_two_point_posterior_matches_closed_form() {
        let params = KernelParams::isotropic(1, 1.0, 2.0, 0.3);
        let x = Matrix::from_rows(&[vec![-0.5], vec![0.8]]);
        let y = [0.7, -0.2];
        let core = GprCore::fit(x.clone(), &y, params.clone()).unwrap();

        let xq = [0.25];
        let k00 = 2.0 + 0.3;
        let k01 = se_ard_kernel(x.row(0), x.row(1), &params).unwrap();
        let det = k00 * k00 - k01 * k01;
        let inv = [[k00 / det, -k01 / det], [-k01 / det, k00 / det]];
        let ks = [
            se_ard_kernel(x.row(0), &xq, &params).unwrap(),
            se_ard_kernel(x.row(1), &xq, &params).unwrap(),
        ];
        let mean_want = ks[0] * (inv[0][0] * y[0] + inv[0][1] * y[1])
            + ks[1] * (inv[1][0] * y[0] + inv[1][1] * y[1]);
        let quad = ks[0] * (inv[0][0] * ks[0] + inv[0][1] * ks[1])
            + ks[1] * (inv[1][0] * ks[0] + inv[1][1] * ks[1]);
        let var_want = 2.0 - quad;

        let p = core.predict(&xq).unwrap();
        assert_close(p.mean, mean_want, 1e-12);
        assert_close(p.variance, var_want, 1e-12);
    }

    #[test]
    fn core_prior_reversion_far_from_data() {
        let params = KernelParams::isotropic(1, 1.0, 1.4, 0.1);
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let core = GprCore::fit(x, &[3.0, -2.0], params).unwrap();
        let p = core.predict(&[500.0]).unwrap();
        assert!(p.mean.abs() < 1e-12);
        assert_close(p.variance, 1.4, 1e-12);
    }

    #[test]
    fn core_single_point_noise_free_interpolates() {
        let params = KernelParams::isotropic(1, 1.0, 1.0, 0.0);
        let x = Matrix::from_rows(&[vec![0.4]]);
        let core = GprCore::fit(x, &[2.5], params).unwrap();
        let p = core.predict(&[0.4]).unwrap();
        assert_close(p.mean, 2.5, 1e-9);
        assert!(p.variance < 1e-8);
    }

    #[test]
    fn posterior_variance_never_exceeds_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let sf = rng.gen_range(0.2..4.0);
            let params = KernelParams {
                signal_variance: sf,
                lengthscales: vec![rng.gen_range(0.3..2.0); 2],
                noise_variance: rng.gen_range(0.0..0.5),
            };
            let x = Matrix::from_fn(n, 2, |_, _| rng.gen_range(-2.0..2.0));
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let core = GprCore::fit(x, &y, params).unwrap();
            for _ in 0..10 {
                let q = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
                let p = core.predict(&q).unwrap();
                assert!(p.variance <= sf + 1e-9);
            }
        }
    }

    #[test]
    fn adding_a_training_point_never_increases_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let params = KernelParams {
                signal_variance: 1.0,
                lengthscales: vec![rng.gen_range(0.5..1.5)],
                noise_variance: 0.1,
            };
            let pts: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x5 = Matrix::from_fn(5, 1, |i, _| pts[i]);
            let x6 = Matrix::from_fn(6, 1, |i, _| pts[i]);
            let m5 = GprCore::fit(x5, &y[..5], params.clone()).unwrap();
            let m6 = GprCore::fit(x6, &y, params).unwrap();
            for _ in 0..10 {
                let q = [rng.gen_range(-3.0..3.0)];
                let v5 = m5.predict(&q).unwrap().variance;
                let v6 = m6.predict(&q).unwrap().variance;
                assert!(v6 <= v5 + 1e-9, "information gain must be monotone");
            }
        }
    }

    #[test]
    fn relevance_ranking_cases() {
        // Direct inversion: lengthscales (2, 0.5, 1) -> order (1, 2, 0).
        let order: Vec<usize> = ranking_from_lengthscales(&[2.0, 0.5, 1.0])
            .iter()
            .map(|(i, _)| *i)
            .collect();
        assert_eq!(order, vec![1, 2, 0]);

        // All equal -> tie-break by ascending feature index.
        let order: Vec<usize> = ranking_from_lengthscales(&[1.0, 1.0, 1.0])
            .iter()
            .map(|(i, _)| *i)
            .collect();
        assert_eq!(order, vec![0, 1, 2]);
    }

    fn small_training_set() -> (Matrix, Vec<f64>, Vec<String>) {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 25;
        let x = Matrix::from_fn(n, 2, |_, _| rng.gen_range(0.0..4.0));
        let y: Vec<f64> = (0..n)
            .map(|i| 5.0 + 2.0 * x.get(i, 0).sin() + 0.05 * rng.gen_range(-1.0..1.0))
            .collect();
        (x, y, vec!["a".into(), "b".into()])
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y, names) = small_training_set();
        let cfg = FitConfig {
            lambda: LambdaChoice::Auto,
            optimizer: OptimizerConfig { max_iters: 50, restarts: 2, ..Default::default() },
        };
        let m1 = GprModel::fit(&x, &y, &names, "demo", &cfg).unwrap();
        let m2 = GprModel::fit(&x, &y, &names, "demo", &cfg).unwrap();
        assert_eq!(m1.params(), m2.params());
        assert_eq!(m1.transform(), m2.transform());
        let q = [1.0, 2.0];
        assert_eq!(m1.predict(&q).unwrap().mean.to_bits(), m2.predict(&q).unwrap().mean.to_bits());
    }

    #[test]
    fn fit_with_zero_noise_interpolates_training_targets() {
        // Rough targets keep the optimized lengthscales short and the
        // noise-free kernel matrix well conditioned, so interpolation is
        // limited by round-off rather than jitter.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let n = 14;
        let x = Matrix::from_fn(n, 2, |_, _| rng.gen_range(0.0..4.0));
        let y: Vec<f64> = (0..n)
            .map(|i| 4.0 + (2.2 * x.get(i, 0)).sin() * (1.9 * x.get(i, 1)).cos())
            .collect();
        let names = vec!["a".to_string(), "b".to_string()];
        let cfg = FitConfig {
            lambda: LambdaChoice::Off,
            optimizer: OptimizerConfig { max_iters: 60, restarts: 1, ..Default::default() },
        };
        let model = GprModel::fit(&x, &y, &names, "demo", &cfg).unwrap();
        let mut params = model.params().clone();
        params.noise_variance = 0.0;
        let exact = model.refit_with_params(params).unwrap();
        for i in 0..x.rows() {
            let p = exact.predict(x.row(i)).unwrap();
            assert!(
                (p.mean - y[i]).abs() <= 1e-6 * y[i].abs().max(1.0),
                "row {i}: predicted {} vs target {}",
                p.mean,
                y[i]
            );
        }
    }

    #[test]
    fn fit_rejects_tiny_or_mismatched_data() {
        let x = Matrix::from_rows(&[vec![1.0]]);
        let names = vec!["a".to_string()];
        assert!(matches!(
            GprModel::fit(&x, &[1.0], &names, "demo", &FitConfig::default()),
            Err(GprError::TooFewPoints(1))
        ));
        let x2 = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        assert!(matches!(
            GprModel::fit(&x2, &[1.0], &names, "demo", &FitConfig::default()),
            Err(GprError::Dimension(_))
        ));
    }
}
