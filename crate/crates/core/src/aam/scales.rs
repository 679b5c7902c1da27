use alloc::vec::Vec;

use libm::{exp, expm1, log};

use crate::error::{check_positive, Error, Result};

/// Increment durations, in Lamperti-transformed time, at which moments are
/// estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    /// Fraction of the series duration spanned by the largest scale.
    pub rho: Option<f64>,
    /// Sampling step of the raw series.
    pub step: Option<f64>,
}

impl ScaleGrid {
    /// Grid from explicit scales, which must be positive and strictly increasing.
    pub fn custom(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || !scales.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(Error::Grid("scales must be positive and finite"));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("scales must be strictly increasing"));
        }
        Ok(Self {
            scales,
            rho: None,
            step: None,
        })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// `n` scales from `exp(theta' step) - 1` to `exp(theta' step rho N) - 1`,
/// evenly spaced in `ln(tau)`.
///
/// The bounds are the transformed durations of one sampling step and of
/// `rho N` steps, both measured from time zero.
pub fn build_scale_grid(
    theta_p: f64,
    step: f64,
    n_obs: usize,
    rho: f64,
    n: usize,
) -> Result<ScaleGrid> {
    check_positive("theta'", theta_p)?;
    check_positive("step", step)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            expected: "0 < rho < 1",
        });
    }
    if n < 3 {
        return Err(Error::Domain {
            name: "n_scales",
            value: n as f64,
            expected: ">= 3",
        });
    }
    let lo = expm1(theta_p * step);
    let hi = expm1(theta_p * step * rho * n_obs as f64);
    if !(hi > lo * (1.0 + 1e-9)) || !hi.is_finite() || !(lo > 0.0) {
        return Err(Error::ScaleSpan { lo, hi });
    }
    let (ln_lo, ln_hi) = (log(lo), log(hi));
    let mut scales: Vec<f64> = (0..n)
        .map(|i| exp(ln_lo + (ln_hi - ln_lo) * i as f64 / (n - 1) as f64))
        .collect();
    scales[0] = lo;
    scales[n - 1] = hi;
    Ok(ScaleGrid {
        scales,
        rho: Some(rho),
        step: Some(step),
    })
}
