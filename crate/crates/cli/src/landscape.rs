//! Log-likelihood and `f_S` on a rectangular `(H, theta)` grid.

use lamperti_core::aam::{aam_objective, AamConfig};
use lamperti_core::mle::log_likelihood;
use lamperti_core::TimeSeries;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::io::{Cell, Table};

/// `n` points from `lo` to `hi`, evenly spaced in value or in log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub log: bool,
}

impl Axis {
    /// Parses `lo:hi:n`, or `log:lo:hi:n` for log spacing.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || {
            CliError::Input(format!(
                "bad grid `{s}`: expected `lo:hi:n` or `log:lo:hi:n`"
            ))
        };
        let (log, rest) = match s.strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let axis = Self {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
            n: n.trim().parse().map_err(|_| bad())?,
            log,
        };
        if axis.n == 0
            || !(axis.lo <= axis.hi)
            || (axis.n > 1 && axis.lo == axis.hi)
            || (log && axis.lo <= 0.0)
        {
            return Err(bad());
        }
        Ok(axis)
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let u = i as f64 / last;
                if self.log {
                    (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + u * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeCell {
    pub hurst: f64,
    pub theta: f64,
    pub log_likelihood: Option<f64>,
    pub f_s: Option<f64>,
}

/// Cells in row-major order: `hurst` outer, `theta` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub hursts: Vec<f64>,
    pub thetas: Vec<f64>,
    pub cells: Vec<LandscapeCell>,
}

/// Where the likelihood peaks and how flat it is along each axis there.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSummary {
    pub best_hurst: f64,
    pub best_theta: f64,
    pub best_log_likelihood: f64,
    /// Likelihood range across `theta` in the row of the best `H`.
    pub range_across_theta: f64,
    /// Likelihood range across `H` in the column of the best `theta`.
    pub range_across_hurst: f64,
}

impl RidgeSummary {
    pub fn is_theta_ridge(&self) -> bool {
        self.range_across_theta < self.range_across_hurst
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn evaluate_landscape(
    series: &TimeSeries,
    hursts: &[f64],
    thetas: &[f64],
    aam: &AamConfig,
) -> Landscape {
    let coords: Vec<(f64, f64)> = hursts
        .iter()
        .flat_map(|&h| thetas.iter().map(move |&t| (h, t)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(hurst, theta)| LandscapeCell {
            hurst,
            theta,
            log_likelihood: log_likelihood(series, hurst, theta)
                .ok()
                .and_then(|l| finite(l.value)),
            f_s: finite(aam_objective(series, hurst, theta, aam)),
        })
        .collect();
    Landscape {
        hursts: hursts.to_vec(),
        thetas: thetas.to_vec(),
        cells,
    }
}

fn range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo <= hi {
        hi - lo
    } else {
        0.0
    }
}

impl Landscape {
    fn cell(&self, i: usize, j: usize) -> &LandscapeCell {
        &self.cells[i * self.thetas.len() + j]
    }

    /// Grid maximum of the likelihood, first in row-major order on ties.
    pub fn best(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, c) in self.cells.iter().enumerate() {
            if let Some(ll) = c.log_likelihood {
                if best.is_none_or(|(_, b)| ll > b) {
                    best = Some((k, ll));
                }
            }
        }
        best.map(|(k, _)| (k / self.thetas.len(), k % self.thetas.len()))
    }

    pub fn ridge(&self) -> Option<RidgeSummary> {
        let (i, j) = self.best()?;
        let best = self.cell(i, j);
        Some(RidgeSummary {
            best_hurst: best.hurst,
            best_theta: best.theta,
            best_log_likelihood: best.log_likelihood?,
            range_across_theta: range(
                (0..self.thetas.len()).filter_map(|jj| self.cell(i, jj).log_likelihood),
            ),
            range_across_hurst: range(
                (0..self.hursts.len()).filter_map(|ii| self.cell(ii, j).log_likelihood),
            ),
        })
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["hurst", "theta", "log_likelihood", "f_s"]);
        for c in &self.cells {
            t.push(vec![
                c.hurst.into(),
                c.theta.into(),
                Cell::opt(c.log_likelihood),
                Cell::opt(c.f_s),
            ]);
        }
        t
    }

    /// For every `theta`, the `H` with the highest likelihood.
    pub fn ridge_table(&self) -> Table {
        let mut t = Table::new(&["theta", "hurst", "log_likelihood"]);
        for (j, &theta) in self.thetas.iter().enumerate() {
            let best = (0..self.hursts.len())
                .filter_map(|i| self.cell(i, j).log_likelihood.map(|ll| (i, ll)))
                .fold(None, |acc: Option<(usize, f64)>, (i, ll)| match acc {
                    Some((_, b)) if b >= ll => acc,
                    _ => Some((i, ll)),
                });
            match best {
                Some((i, ll)) => t.push(vec![theta.into(), self.hursts[i].into(), ll.into()]),
                None => t.push(vec![theta.into(), Cell::Empty, Cell::Empty]),
            }
        }
        t
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(&[
            "best_hurst",
            "best_theta",
            "best_log_likelihood",
            "range_across_theta",
            "range_across_hurst",
            "theta_ridge",
        ]);
        if let Some(r) = self.ridge() {
            t.push(vec![
                r.best_hurst.into(),
                r.best_theta.into(),
                r.best_log_likelihood.into(),
                r.range_across_theta.into(),
                r.range_across_hurst.into(),
                r.is_theta_ridge().into(),
            ]);
        }
        t
    }
}
