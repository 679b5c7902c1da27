use alloc::vec::Vec;

use libm::log;

use super::kernel::LogLogPlot;
use crate::error::{Error, Result};
use crate::stats::ols;

/// Half-slope and linearity exponent of a log-log plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub hurst_slope: f64,
    pub alpha: f64,
}

/// Half the OLS slope (with intercept) of `ln M` against `ln tau`.
pub fn slope_regression(plot: &LogLogPlot) -> Result<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = plot
        .ln_tau
        .iter()
        .zip(&plot.ln_moment)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .unzip();
    if x.len() < 3 {
        return Err(Error::Regression { usable: x.len() });
    }
    ols(&x, &y)
        .map(|(slope, _)| 0.5 * slope)
        .ok_or(Error::Regression { usable: 0 })
}

/// Exponent `alpha` of `ln M(tau) - ln M(tau_min) ~ (ln tau - ln tau_min)^alpha`,
/// from the OLS slope of the log of both sides. The first point (where both
/// differences vanish) and any point with a non-positive difference are
/// left out.
pub fn linearity_regression(plot: &LogLogPlot) -> Result<f64> {
    let (Some(&x0), Some(&y0)) = (plot.ln_tau.first(), plot.ln_moment.first()) else {
        return Err(Error::Regression { usable: 0 });
    };
    let (x, y): (Vec<f64>, Vec<f64>) = plot
        .ln_tau
        .iter()
        .zip(&plot.ln_moment)
        .skip(1)
        .map(|(x, y)| (x - x0, y - y0))
        .filter(|(dx, dy)| *dx > 0.0 && *dy > 0.0 && dx.is_finite() && dy.is_finite())
        .map(|(dx, dy)| (log(dx), log(dy)))
        .unzip();
    if x.len() < 3 {
        return Err(Error::Regression { usable: x.len() });
    }
    ols(&x, &y)
        .map(|(slope, _)| slope)
        .ok_or(Error::Regression { usable: 0 })
}

pub fn loglog_regressions(plot: &LogLogPlot) -> Result<LogLogFit> {
    Ok(LogLogFit {
        hurst_slope: slope_regression(plot)?,
        alpha: linearity_regression(plot)?,
    })
}
