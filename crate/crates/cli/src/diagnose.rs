//! Misspecification check: Lamperti-transform a series with given (or
//! ML-fitted) parameters and inspect the log-log plot of the result.

use lamperti_core::aam::{
    aam_diagnostics, kernel_smoothed_moments, AamConfig, AamDiagnostics, KernelFamily, KernelSpec,
    LogLogPlot, ScaleGrid,
};
use lamperti_core::mle::{fit_ml, MlOptions};
use lamperti_core::{Error, TimeSeries};

use crate::error::Result;
use crate::io::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub hurst_p: f64,
    pub theta_p: f64,
    pub transformed: AamDiagnostics,
    pub raw: LogLogPlot,
}

impl Diagnosis {
    /// `|H_slope - H'|`.
    pub fn score(&self) -> f64 {
        self.transformed.slope_gap
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(&[
            "hurst_p",
            "theta_p",
            "hurst_slope",
            "alpha",
            "score",
            "objective",
        ]);
        let d = &self.transformed;
        t.push(vec![
            self.hurst_p.into(),
            self.theta_p.into(),
            d.fit.hurst_slope.into(),
            d.fit.alpha.into(),
            d.slope_gap.into(),
            d.objective.into(),
        ]);
        t
    }
}

/// Log-log plot of the untransformed series: second moments of increments
/// at whole-step lags spread log-uniformly up to `rho * N` steps.
pub fn raw_loglog(series: &TimeSeries, rho: f64, n_scales: usize) -> Result<LogLogPlot> {
    let n = series.len();
    let step = series.grid().mean_step().ok_or(Error::TooShort {
        required: 2,
        got: n,
    })?;
    let max_lag = ((rho * n as f64).floor() as usize).clamp(1, n - 1);
    let mut lags: Vec<usize> = (0..n_scales.max(1))
        .map(|i| {
            let u = if n_scales > 1 {
                i as f64 / (n_scales - 1) as f64
            } else {
                0.0
            };
            (max_lag as f64).powf(u).round() as usize
        })
        .collect();
    lags.dedup();
    let grid = ScaleGrid::custom(lags.iter().map(|&l| l as f64 * step).collect())?;
    let kernel = KernelSpec {
        family: KernelFamily::Box,
        bandwidth: Some(0.5 * step),
    };
    Ok(kernel_smoothed_moments(series, &grid, 0.5, &kernel)?)
}

/// Uses `params` as `(H', theta')` when given, otherwise fits them by ML.
pub fn diagnose(
    series: &TimeSeries,
    params: Option<(f64, f64)>,
    config: &AamConfig,
    ml: &MlOptions,
) -> Result<Diagnosis> {
    let (hurst_p, theta_p) = match params {
        Some(p) => p,
        None => {
            let fit = fit_ml(series, ml)?;
            (fit.hurst, fit.theta)
        }
    };
    Ok(Diagnosis {
        hurst_p,
        theta_p,
        transformed: aam_diagnostics(series, hurst_p, theta_p, config)?,
        raw: raw_loglog(series, config.rho, config.n_scales)?,
    })
}
