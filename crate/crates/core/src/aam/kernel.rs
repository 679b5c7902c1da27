//! Kernel regression of squared increments across pair durations.
//!
//! After the direct Lamperti transform the observation times are no longer
//! equispaced, so the second moment of increments of duration `tau` is
//! estimated from all pairs `(j, k)` whose duration `d = T'_k - T'_j` falls
//! in the kernel support around `tau`. Each squared increment is rescaled by
//! `(tau / d)^{2H'}`, its expected ratio under `H'`-self-similarity.

use alloc::vec::Vec;

use libm::{exp, log};

use super::scales::ScaleGrid;
use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::params::TimeSeries;

/// Number of times a bandwidth is doubled when a scale gets zero weight.
pub const MAX_WIDENINGS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelFamily {
    #[default]
    Epanechnikov,
    /// Gaussian with standard deviation `bandwidth / 3`, cut at `±bandwidth`.
    TruncatedGaussian,
    Box,
}

impl KernelFamily {
    /// Unnormalized weight of offset `u` for half-width `b`; zero for `|u| >= b`.
    #[inline]
    pub fn weight(self, u: f64, b: f64) -> f64 {
        let z = u / b;
        if !(z.abs() < 1.0) {
            return 0.0;
        }
        match self {
            Self::Epanechnikov => 1.0 - z * z,
            Self::TruncatedGaussian => exp(-4.5 * z * z),
            Self::Box => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Half-width of the support in transformed-time units; `None` selects
    /// it per scale (see [`kernel_smoothed_moments`]).
    pub bandwidth: Option<f64>,
}

/// How candidate pairs are enumerated. Both give identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairEnumeration {
    /// Every pair `j < k`.
    Full,
    /// Only pairs whose duration can fall in the kernel support, found by
    /// binary search on the sorted transformed times.
    #[default]
    Pruned,
}

/// Points `(ln tau, ln M(tau))` with the total kernel weight and the
/// bandwidth used at each scale.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLogPlot {
    pub ln_tau: Vec<f64>,
    pub ln_moment: Vec<f64>,
    pub total_weight: Vec<f64>,
    pub bandwidth: Vec<f64>,
}

impl LogLogPlot {
    pub fn len(&self) -> usize {
        self.ln_tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_tau.is_empty()
    }
}

/// Half the gap to the neighbouring scales, so that adjacent supports just
/// touch (one-sided at the ends).
fn local_spacing(scales: &[f64], i: usize) -> f64 {
    let n = scales.len();
    match (i, n) {
        (_, 1) => 0.5 * scales[0],
        (0, _) => 0.5 * (scales[1] - scales[0]),
        (i, n) if i == n - 1 => 0.5 * (scales[n - 1] - scales[n - 2]),
        (i, _) => 0.25 * (scales[i + 1] - scales[i - 1]),
    }
}

/// Weighted mean of the rescaled squared increments at one scale, with its
/// total weight.
fn smooth_at(
    times: &[f64],
    values: &[f64],
    tau: f64,
    bandwidth: f64,
    hurst_p: f64,
    family: KernelFamily,
    enumeration: PairEnumeration,
) -> (f64, f64) {
    let n = times.len();
    let two_hp = 2.0 * hurst_p;
    let ln_tau = log(tau);
    let mut acc = 0.0;
    let mut total = 0.0;
    for j in 0..n.saturating_sub(1) {
        let (lo, hi) = match enumeration {
            PairEnumeration::Full => (j + 1, n),
            PairEnumeration::Pruned => {
                let rest = &times[j + 1..];
                let lo = rest.partition_point(|&t| t - times[j] <= tau - bandwidth);
                let hi = rest.partition_point(|&t| t - times[j] < tau + bandwidth);
                (j + 1 + lo, j + 1 + hi)
            }
        };
        for k in lo..hi {
            let d = times[k] - times[j];
            let w = family.weight(d - tau, bandwidth);
            if w == 0.0 {
                continue;
            }
            let inc = values[k] - values[j];
            total += w;
            acc += w * inc * inc * exp(two_hp * (ln_tau - log(d)));
        }
    }
    (acc, total)
}

/// Kernel estimate of the second moment of increments at every scale of
/// `grid`, for a series already mapped through the direct Lamperti
/// transform with exponent `hurst_p`.
///
/// With an automatic bandwidth, scale `tau_i` uses half the local spacing
/// of the grid, so each pair duration is shared by at most two neighbouring
/// scales. Whenever a scale ends up with zero total weight its bandwidth is
/// doubled, up to [`MAX_WIDENINGS`] times.
pub fn kernel_smoothed_moments(
    transformed: &TimeSeries,
    grid: &ScaleGrid,
    hurst_p: f64,
    kernel: &KernelSpec,
) -> Result<LogLogPlot> {
    kernel_smoothed_moments_with(
        transformed,
        grid,
        hurst_p,
        kernel,
        PairEnumeration::default(),
    )
}

pub fn kernel_smoothed_moments_with(
    transformed: &TimeSeries,
    grid: &ScaleGrid,
    hurst_p: f64,
    kernel: &KernelSpec,
    enumeration: PairEnumeration,
) -> Result<LogLogPlot> {
    check_open_unit("H'", hurst_p)?;
    if let Some(b) = kernel.bandwidth {
        check_positive("bandwidth", b)?;
    }
    let times = transformed.times();
    let values = transformed.values();
    let scales = grid.scales();
    let mut plot = LogLogPlot {
        ln_tau: Vec::with_capacity(scales.len()),
        ln_moment: Vec::with_capacity(scales.len()),
        total_weight: Vec::with_capacity(scales.len()),
        bandwidth: Vec::with_capacity(scales.len()),
    };
    for (index, &tau) in scales.iter().enumerate() {
        let mut bandwidth = match kernel.bandwidth {
            Some(b) => b,
            None => local_spacing(scales, index),
        };
        let mut widenings = 0;
        let (acc, total) = loop {
            let (acc, total) = smooth_at(
                times,
                values,
                tau,
                bandwidth,
                hurst_p,
                kernel.family,
                enumeration,
            );
            if total > 0.0 {
                break (acc, total);
            }
            if widenings == MAX_WIDENINGS {
                return Err(Error::ZeroWeight { index, scale: tau });
            }
            widenings += 1;
            bandwidth *= 2.0;
        };
        plot.ln_tau.push(log(tau));
        plot.ln_moment.push(log(acc / total));
        plot.total_weight.push(total);
        plot.bandwidth.push(bandwidth);
    }
    Ok(plot)
}
