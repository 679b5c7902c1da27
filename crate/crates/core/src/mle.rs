//! Exact Gaussian likelihood of a delampertized fBm and its maximization.

use core::f64::consts::PI;

use alloc::vec::Vec;
use libm::log;

use crate::clock::Stopwatch;
use crate::covariance::{build_covariance_matrix, ProcessModel};
use crate::error::{check_positive, Error, Result};
use crate::params::{EstimationMethod, EstimationResult, ModelParams, TimeSeries};
use crate::simplex::{nelder_mead, Direction, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodValue {
    /// Natural-log likelihood.
    pub value: f64,
    /// Diagonal jitter needed to factorize the covariance.
    pub jitter_used: f64,
}

/// Log-likelihood of the standard (`mu = 0`, `sigma = 1`) model:
/// `-1/2 ln det(Sigma) - N/2 ln(2 pi) - 1/2 S' Sigma^{-1} S`,
/// evaluated through a Cholesky factor of `Sigma`.
pub fn log_likelihood(series: &TimeSeries, hurst: f64, theta: f64) -> Result<LikelihoodValue> {
    log_likelihood_affine(series, hurst, theta, 0.0, 1.0)
}

/// Log-likelihood of `S = mu 1 + sigma Y`:
/// `-1/2 ln det(Sigma) - N/2 ln(2 pi sigma^2) - (S - mu 1)' Sigma^{-1} (S - mu 1) / (2 sigma^2)`.
pub fn log_likelihood_affine(
    series: &TimeSeries,
    hurst: f64,
    theta: f64,
    mu: f64,
    sigma: f64,
) -> Result<LikelihoodValue> {
    check_positive("sigma", sigma)?;
    if series.is_empty() {
        return Err(Error::TooShort {
            required: 1,
            got: 0,
        });
    }
    let params = ModelParams::new(hurst, theta)?;
    let cov = build_covariance_matrix(series.grid(), &params, ProcessModel::Delampertized)?;
    let factor = cov.factor()?;
    let centered: Vec<f64> = series.values().iter().map(|s| s - mu).collect();
    let quad = factor.inverse_quadratic_form(&centered);
    let n = series.len() as f64;
    let value = -0.5 * factor.log_det()
        - 0.5 * n * log(2.0 * PI * sigma * sigma)
        - 0.5 * quad / (sigma * sigma);
    Ok(LikelihoodValue {
        value,
        jitter_used: factor.jitter(),
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MlOptions {
    pub simplex: SimplexOptions,
}

/// Maximum-likelihood estimate of `(H, theta)` for the standard model.
///
/// Parameter pairs where the covariance cannot be factorized count as
/// `-inf` for the optimizer.
pub fn fit_ml(series: &TimeSeries, options: &MlOptions) -> Result<EstimationResult> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: series.len(),
        });
    }
    let clock = Stopwatch::start();
    let outcome = nelder_mead(
        |p| {
            log_likelihood(series, p.hurst, p.theta)
                .map(|l| l.value)
                .unwrap_or(f64::NEG_INFINITY)
        },
        Direction::Maximize,
        &options.simplex,
    )?;
    Ok(EstimationResult {
        method: EstimationMethod::Ml,
        hurst: outcome.best.hurst,
        theta: outcome.best.theta,
        objective: outcome.value,
        hurst_slope: None,
        alpha: None,
        iterations: outcome.iterations,
        converged: outcome.converged,
        wall_time: clock.elapsed_secs(),
    })
}
