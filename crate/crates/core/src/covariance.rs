//! Covariance functions of the fBm and of its stationary inverse Lamperti
//! transform, and the dense covariance matrices built from them.

use libm::{exp, expm1, fabs, log, log1p, pow};

use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::linalg::{Cholesky, SquareMatrix};
use crate::params::{ModelParams, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessModel {
    /// Fractional Brownian motion, `X_0 = 0`.
    Fbm,
    /// Stationary inverse Lamperti transform of an fBm.
    Delampertized,
}

/// `E[X_s X_t] = sigma^2 / 2 (|t|^{2H} + |s|^{2H} - |t - s|^{2H})`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64, sigma: f64) -> Result<f64> {
    check_open_unit("H", hurst)?;
    check_positive("sigma", sigma)?;
    let two_h = 2.0 * hurst;
    Ok(0.5 * sigma * sigma * (pow(fabs(t), two_h) + pow(fabs(s), two_h) - pow(fabs(t - s), two_h)))
}

/// Correlation of the standard delampertized fBm at time lag `dt`:
/// `cosh(theta H dt) - 2^{2H-1} |sinh(theta dt / 2)|^{2H}`.
pub fn delamperti_covariance(dt: f64, hurst: f64, theta: f64) -> Result<f64> {
    check_open_unit("H", hurst)?;
    check_positive("theta", theta)?;
    Ok(delamperti_covariance_unchecked(dt, hurst, theta))
}

/// Both terms of the closed form grow like `exp(theta H |dt|) / 2`; writing
/// `u = theta |dt| / 2` and factoring that growth out gives
/// `exp(2Hu)/2 * (1 - (1 - e^{-2u})^{2H}) + exp(-2Hu)/2`, which stays
/// accurate for large lags and for `u -> 0`.
#[inline]
pub(crate) fn delamperti_covariance_unchecked(dt: f64, hurst: f64, theta: f64) -> f64 {
    let u = 0.5 * theta * fabs(dt);
    if u == 0.0 {
        return 1.0;
    }
    let two_h = 2.0 * hurst;
    // ln(1 - e^{-2u}), split at ln 2 so neither branch rounds to zero
    let log_gap = if 2.0 * u > core::f64::consts::LN_2 {
        log1p(-exp(-2.0 * u))
    } else {
        log(-expm1(-2.0 * u))
    };
    let one_minus_pow = -expm1(two_h * log_gap);
    0.5 * (exp(two_h * u + log(one_minus_pow)) + exp(-two_h * u))
}

/// Dense covariance matrix on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub model: ProcessModel,
    matrix: SquareMatrix,
}

impl CovarianceMatrix {
    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    /// Cholesky factor, with jitter escalation on failure.
    pub fn factor(&self) -> Result<Cholesky> {
        Cholesky::factor(&self.matrix)
    }
}

/// Covariance of the process `sigma * Y` (or `sigma * X` for the fBm) on
/// `grid`. The `mu` field of `params` plays no role here. For the standard
/// delampertized model (`sigma = 1`) the diagonal is exactly one.
pub fn build_covariance_matrix(
    grid: &TimeGrid,
    params: &ModelParams,
    model: ProcessModel,
) -> Result<CovarianceMatrix> {
    params.validate()?;
    let times = grid.times();
    let n = times.len();
    let var = params.sigma * params.sigma;
    let matrix = match model {
        ProcessModel::Delampertized => {
            let (h, theta) = (params.hurst, params.theta);
            match grid.mean_step().filter(|_| grid.is_equispaced()) {
                // Toeplitz: one evaluation per lag
                Some(step) => {
                    let lags: alloc::vec::Vec<f64> = (0..n)
                        .map(|k| var * delamperti_covariance_unchecked(k as f64 * step, h, theta))
                        .collect();
                    SquareMatrix::from_symmetric_fn(n, |i, j| lags[i - j])
                }
                None => SquareMatrix::from_symmetric_fn(n, |i, j| {
                    var * delamperti_covariance_unchecked(times[i] - times[j], h, theta)
                }),
            }
        }
        ProcessModel::Fbm => {
            if times[0] < 0.0 {
                return Err(Error::Grid("fBm times must be non-negative"));
            }
            let two_h = 2.0 * params.hurst;
            SquareMatrix::from_symmetric_fn(n, |i, j| {
                0.5 * var
                    * (pow(times[i], two_h) + pow(times[j], two_h)
                        - pow(fabs(times[i] - times[j]), two_h))
            })
        }
    };
    Ok(CovarianceMatrix { model, matrix })
}
