//! Direct and inverse Lamperti transforms with a linear time contraction.
//!
//! The direct transform of parameters `(H', theta')` maps a stationary `Y`
//! to the `H'`-self-similar `Z_t = t^{H'} Y_{ln(t) / theta'}`; the inverse
//! transform of parameters `(H, theta)` maps a self-similar `X` to the
//! stationary `Y_t = exp(-H theta t) X_{exp(theta t)}`.

use alloc::vec::Vec;

use libm::{exp, log, pow};

use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::params::{TimeGrid, TimeSeries};

/// Largest `theta' * t` accepted before `exp` is considered to overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Samples of `Z = L_{H', theta'} Y` from samples of `Y`:
/// `T'_i = exp(theta' T_i)`, `S'_i = exp(theta' H' T_i) S_i`.
pub fn lamperti_direct_series(
    series: &TimeSeries,
    hurst_p: f64,
    theta_p: f64,
) -> Result<TimeSeries> {
    check_open_unit("H'", hurst_p)?;
    check_positive("theta'", theta_p)?;
    let n = series.len();
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (index, (&t, &s)) in series.times().iter().zip(series.values()).enumerate() {
        let exponent = theta_p * t;
        if exponent > MAX_EXPONENT {
            return Err(Error::Range { index, exponent });
        }
        times.push(exp(exponent));
        values.push(exp(hurst_p * exponent) * s);
    }
    TimeSeries::new(TimeGrid::new(times)?, values)
}

/// Samples of `Y = L^{-1}_{H, theta} X` from samples of `X` at positive times:
/// times `ln(T_i) / theta`, values `T_i^{-H} S_i`.
pub fn lamperti_inverse_series(series: &TimeSeries, hurst: f64, theta: f64) -> Result<TimeSeries> {
    check_open_unit("H", hurst)?;
    check_positive("theta", theta)?;
    let mut times = Vec::with_capacity(series.len());
    let mut values = Vec::with_capacity(series.len());
    for (&t, &s) in series.times().iter().zip(series.values()) {
        if !(t > 0.0) {
            return Err(Error::Domain {
                name: "time",
                value: t,
                expected: "> 0 for the inverse Lamperti transform",
            });
        }
        times.push(log(t) / theta);
        values.push(pow(t, -hurst) * s);
    }
    TimeSeries::new(TimeGrid::new(times)?, values)
}

/// Exponent `h = H' - (theta / theta') H` of the composed transform.
pub fn h_exponent(hurst: f64, theta: f64, hurst_p: f64, theta_p: f64) -> f64 {
    hurst_p - theta / theta_p * hurst
}

/// For `Z = L_{H', theta'} L^{-1}_{H, theta} X`, returns `(t^h, t^{theta/theta'})`
/// so that `Z_t = t^h X_{t^{theta/theta'}}`. `Z_0 = 0` is left to the caller.
pub fn composed_process_time_map(
    t: f64,
    hurst: f64,
    theta: f64,
    hurst_p: f64,
    theta_p: f64,
) -> Result<(f64, f64)> {
    check_open_unit("H", hurst)?;
    check_positive("theta", theta)?;
    check_open_unit("H'", hurst_p)?;
    check_positive("theta'", theta_p)?;
    if !(t > 0.0) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            expected: "> 0 (Z_0 = 0 by extension)",
        });
    }
    let h = h_exponent(hurst, theta, hurst_p, theta_p);
    Ok((pow(t, h), pow(t, theta / theta_p)))
}
