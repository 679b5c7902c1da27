//! Domain types shared by the simulation and estimation modules.

use alloc::vec::Vec;

use crate::error::{check_open_unit, check_positive, Error, Result};

/// Parameters `(H, theta, sigma, mu)` of a delampertized fBm observed as
/// `mu + sigma * Y`, where `Y` is the standard (unit variance) process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Hurst exponent, in `(0, 1)`.
    pub hurst: f64,
    /// Time-contraction rate, `> 0`.
    pub theta: f64,
    /// Volatility scale, `> 0`.
    pub sigma: f64,
    /// Location shift.
    pub mu: f64,
}

impl ModelParams {
    /// Standard process (`sigma = 1`, `mu = 0`).
    pub fn new(hurst: f64, theta: f64) -> Result<Self> {
        Self::affine(hurst, theta, 1.0, 0.0)
    }

    pub fn affine(hurst: f64, theta: f64, sigma: f64, mu: f64) -> Result<Self> {
        let params = Self {
            hurst,
            theta,
            sigma,
            mu,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("H", self.hurst)?;
        check_positive("theta", self.theta)?;
        check_positive("sigma", self.sigma)?;
        if !self.mu.is_finite() {
            return Err(Error::Domain {
                name: "mu",
                value: self.mu,
                expected: "finite",
            });
        }
        Ok(())
    }
}

/// Strictly increasing observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Grid("empty grid"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Grid("non-finite time"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    /// `n` times `step, 2 step, ..., n step`.
    pub fn equispaced(n: usize, step: f64) -> Result<Self> {
        check_positive("step", step)?;
        Self::new((1..=n).map(|i| i as f64 * step).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Average spacing `(t_N - t_1) / (N - 1)`; `None` for a single time.
    pub fn mean_step(&self) -> Option<f64> {
        let n = self.times.len();
        (n >= 2).then(|| (self.times[n - 1] - self.times[0]) / (n - 1) as f64)
    }

    /// True when all gaps equal the mean step to relative precision `1e-9`.
    pub fn is_equispaced(&self) -> bool {
        match self.mean_step() {
            None => true,
            Some(step) => self
                .times
                .windows(2)
                .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step),
        }
    }
}

/// Observation times plus one value per time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch {
                times: grid.len(),
                values: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_vecs(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(TimeGrid::new(times)?, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_parts(self) -> (TimeGrid, Vec<f64>) {
        (self.grid, self.values)
    }

    /// Same times, values mapped through `f`.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimationMethod {
    Ml,
    Aam,
}

impl EstimationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ml => "ML",
            Self::Aam => "AAM",
        }
    }
}

/// Output of [`crate::mle::fit_ml`] or [`crate::aam::fit_aam`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub method: EstimationMethod,
    pub hurst: f64,
    pub theta: f64,
    /// Log-likelihood (ML) or `f_S` (AAM) at the optimum.
    pub objective: f64,
    /// Half-slope of the log-log plot at the optimum (AAM only).
    pub hurst_slope: Option<f64>,
    /// Linearity exponent of the log-log plot at the optimum (AAM only).
    pub alpha: Option<f64>,
    pub iterations: usize,
    /// False when the iteration cap stopped the simplex.
    pub converged: bool,
    /// Seconds spent in the fit (0 without the `std` feature).
    pub wall_time: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_rejects_non_increasing() {
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![1.0, 0.5]).is_err());
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn equispaced_grid() {
        let g = TimeGrid::equispaced(200, 0.001).unwrap();
        assert_eq!(g.len(), 200);
        assert!((g.times()[0] - 0.001).abs() < 1e-15);
        assert!((g.times()[199] - 0.2).abs() < 1e-12);
        assert!(g.is_equispaced());
        assert!((g.mean_step().unwrap() - 0.001).abs() < 1e-15);
        assert!(!TimeGrid::new(vec![0.0, 1.0, 3.0]).unwrap().is_equispaced());
    }

    #[test]
    fn series_length_mismatch() {
        let err = TimeSeries::from_vecs(vec![0.0, 1.0], vec![1.0]).unwrap_err();
        assert_eq!(
            err,
            Error::LengthMismatch {
                times: 2,
                values: 1
            }
        );
    }

    #[test]
    fn params_domain() {
        assert!(ModelParams::new(0.65, 30.0).is_ok());
        assert!(ModelParams::new(1.0, 30.0).is_err());
        assert!(ModelParams::new(0.0, 30.0).is_err());
        assert!(ModelParams::new(0.5, 0.0).is_err());
        assert!(ModelParams::affine(0.5, 1.0, -1.0, 0.0).is_err());
    }
}
