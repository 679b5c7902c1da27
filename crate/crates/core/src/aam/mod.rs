//! Adapted absolute-moment (AAM) estimation.
//!
//! For trial parameters `(H', theta')` the stationary observations are
//! mapped through the direct Lamperti transform, second moments of the
//! transformed increments are estimated by kernel regression on a grid of
//! scales, and two log-log regressions give the half-slope `H_slope` and the
//! linearity exponent `alpha`. The objective
//! `f_S(H', theta') = |H_slope - H'| + |alpha - 1|`
//! vanishes in expectation only at the true parameters.

mod kernel;
mod regression;
mod scales;
pub mod theory;

pub use kernel::{
    kernel_smoothed_moments, kernel_smoothed_moments_with, KernelFamily, KernelSpec, LogLogPlot,
    PairEnumeration, MAX_WIDENINGS,
};
pub use regression::{linearity_regression, loglog_regressions, slope_regression, LogLogFit};
pub use scales::{build_scale_grid, ScaleGrid};
pub use theory::{
    absolute_moment_constant, asymptotic_moment, empirical_absolute_moment, theoretical_moment,
    ComposedModel, ComposedSampler,
};

use crate::clock::Stopwatch;
use crate::error::{Error, Result};
use crate::lamperti::{lamperti_direct_series, MAX_EXPONENT};
use crate::params::{EstimationMethod, EstimationResult, TimeSeries};
use crate::simplex::{nelder_mead, ConstraintMode, Direction, SimplexOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct AamConfig {
    /// Largest scale as a fraction of the series duration.
    pub rho: f64,
    pub n_scales: usize,
    pub kernel: KernelSpec,
    pub enumeration: PairEnumeration,
    /// Sampling step used for the scale grid; defaults to the mean spacing
    /// of the series.
    pub step: Option<f64>,
    /// `theta` used to place the scale grid; `None` places it with the
    /// trial `theta'`.
    pub scale_anchor: Option<f64>,
}

impl Default for AamConfig {
    fn default() -> Self {
        Self {
            rho: 0.2,
            n_scales: 15,
            kernel: KernelSpec::default(),
            enumeration: PairEnumeration::default(),
            step: None,
            scale_anchor: None,
        }
    }
}

/// Everything computed on the way to `f_S` for one `(H', theta')`.
#[derive(Debug, Clone, PartialEq)]
pub struct AamDiagnostics {
    pub scales: ScaleGrid,
    pub plot: LogLogPlot,
    pub fit: LogLogFit,
    /// `f_S(H', theta')`.
    pub objective: f64,
    /// `|H_slope - H'|`, the misspecification score.
    pub slope_gap: f64,
}

/// Runs the full AAM pipeline at `(hurst_p, theta_p)`, reporting failures.
pub fn aam_diagnostics(
    series: &TimeSeries,
    hurst_p: f64,
    theta_p: f64,
    config: &AamConfig,
) -> Result<AamDiagnostics> {
    let step = match config.step {
        Some(step) => step,
        None => series.grid().mean_step().ok_or(Error::TooShort {
            required: 2,
            got: series.len(),
        })?,
    };
    let transformed = lamperti_direct_series(series, hurst_p, theta_p)?;
    let anchor = config.scale_anchor.unwrap_or(theta_p);
    let scales = build_scale_grid(anchor, step, series.len(), config.rho, config.n_scales)?;
    let plot = kernel_smoothed_moments_with(
        &transformed,
        &scales,
        hurst_p,
        &config.kernel,
        config.enumeration,
    )?;
    let fit = loglog_regressions(&plot)?;
    let slope_gap = (fit.hurst_slope - hurst_p).abs();
    Ok(AamDiagnostics {
        objective: slope_gap + (fit.alpha - 1.0).abs(),
        slope_gap,
        scales,
        plot,
        fit,
    })
}

/// `f_S(H', theta')`; any failure along the pipeline (overflow, empty
/// kernel support, degenerate regression) yields `+inf`.
pub fn aam_objective(series: &TimeSeries, hurst_p: f64, theta_p: f64, config: &AamConfig) -> f64 {
    match aam_diagnostics(series, hurst_p, theta_p, config) {
        Ok(d) if d.objective.is_finite() => d.objective,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AamOptions {
    pub config: AamConfig,
    pub simplex: SimplexOptions,
}

impl Default for AamOptions {
    /// Box-constrained simplex; `f_S` is flat in large `theta'`.
    fn default() -> Self {
        Self {
            config: AamConfig::default(),
            simplex: SimplexOptions {
                constraints: ConstraintMode::Box,
                ..SimplexOptions::default()
            },
        }
    }
}

/// Fraction of the overflow limit beyond which an AAM optimum is rejected.
pub const BOUNDARY_FRACTION: f64 = 0.99;

/// Minimizes `f_S` over `(H', theta')`.
///
/// `f_S` also decreases towards zero as `theta'` grows without bound, since
/// the exponential time change then dominates the transformed increments.
/// An optimum that ran into the overflow limit of the transform is
/// therefore reported as [`Error::OverflowBoundary`] rather than returned.
pub fn fit_aam(series: &TimeSeries, options: &AamOptions) -> Result<EstimationResult> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: series.len(),
        });
    }
    let clock = Stopwatch::start();
    let outcome = nelder_mead(
        |p| aam_objective(series, p.hurst, p.theta, &options.config),
        Direction::Minimize,
        &options.simplex,
    )?;
    let t_max = series.times()[series.len() - 1].abs();
    if outcome.best.theta * t_max > BOUNDARY_FRACTION * MAX_EXPONENT {
        return Err(Error::OverflowBoundary {
            theta: outcome.best.theta,
        });
    }
    let at_optimum = aam_diagnostics(
        series,
        outcome.best.hurst,
        outcome.best.theta,
        &options.config,
    )
    .ok();
    Ok(EstimationResult {
        method: EstimationMethod::Aam,
        hurst: outcome.best.hurst,
        theta: outcome.best.theta,
        objective: outcome.value,
        hurst_slope: at_optimum.as_ref().map(|d| d.fit.hurst_slope),
        alpha: at_optimum.as_ref().map(|d| d.fit.alpha),
        iterations: outcome.iterations,
        converged: outcome.converged,
        wall_time: clock.elapsed_secs(),
    })
}
