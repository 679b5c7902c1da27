//! Closed-form moments of the increments of `Z = L_{H', theta'} L^{-1}_{H, theta} X`
//! for an fBm `X`, used as analytic oracles for the estimator.

use alloc::vec::Vec;

use libm::{expm1, fabs, log1p, pow, sqrt, tgamma};

use rand_core::RngCore;

use crate::covariance::ProcessModel;
use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::lamperti::{composed_process_time_map, h_exponent};
use crate::params::{ModelParams, TimeGrid, TimeSeries};
use crate::sim::PathSampler;

/// `E|G|^k` for `G ~ N(0, sigma^2)`: `2^{k/2} Gamma((k+1)/2) / Gamma(1/2) * sigma^k`.
pub fn absolute_moment_constant(sigma: f64, k: f64) -> Result<f64> {
    check_positive("sigma", sigma)?;
    check_positive("k", k)?;
    let gamma_half = sqrt(core::f64::consts::PI);
    Ok(pow(2.0, k / 2.0) * tgamma((k + 1.0) / 2.0) / gamma_half * pow(sigma, k))
}

/// Parameters of the fBm `X` (`hurst`, `theta`, `sigma`) and of the direct
/// transform applied to its delampertized version (`hurst_p`, `theta_p`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedModel {
    pub hurst: f64,
    pub theta: f64,
    pub hurst_p: f64,
    pub theta_p: f64,
    pub sigma: f64,
}

impl ComposedModel {
    pub fn validate(&self) -> Result<()> {
        check_open_unit("H", self.hurst)?;
        check_positive("theta", self.theta)?;
        check_open_unit("H'", self.hurst_p)?;
        check_positive("theta'", self.theta_p)?;
        check_positive("sigma", self.sigma)
    }

    /// `E[(Z_{t+tau} - Z_t)^2]` for `t >= 0`, `tau > 0`.
    ///
    /// Evaluated as
    /// `(t+tau)^{2H'} (1 - (t/(t+tau))^h) + t^{2H'} (1 - ((t+tau)/t)^h)
    ///  + (t+tau)^h t^h |(t+tau)^r - t^r|^{2H}` with `r = theta/theta'`,
    /// which avoids cancelling the leading terms when `tau << t`.
    pub fn increment_variance(&self, t: f64, tau: f64) -> f64 {
        let var = self.sigma * self.sigma;
        if t == 0.0 {
            return var * pow(tau, 2.0 * self.hurst_p);
        }
        let h = h_exponent(self.hurst, self.theta, self.hurst_p, self.theta_p);
        let r = self.theta / self.theta_p;
        let x = tau / t;
        let lx = log1p(x);
        let two_hp = 2.0 * self.hurst_p;
        let first = pow(t + tau, two_hp) * -expm1(-h * lx);
        let second = pow(t, two_hp) * -expm1(h * lx);
        let gap = pow(t, r) * expm1(r * lx);
        let third = pow(t + tau, h) * pow(t, h) * pow(fabs(gap), 2.0 * self.hurst);
        var * (first + second + third)
    }
}

fn check_window(t_a: f64, t_b: f64) -> Result<()> {
    check_positive("t_a", t_a)?;
    if !(t_b > t_a) || !t_b.is_finite() {
        return Err(Error::Domain {
            name: "t_b",
            value: t_b,
            expected: "finite and > t_a",
        });
    }
    Ok(())
}

/// Exact expectation of `M_{k,N,t_a,t_b}(Z)`, the mean of the `N`
/// `k`-th absolute increments of `Z` on an equispaced grid of `[t_a, t_b]`.
pub fn theoretical_moment(
    model: &ComposedModel,
    k: f64,
    n: usize,
    t_a: f64,
    t_b: f64,
) -> Result<f64> {
    model.validate()?;
    check_window(t_a, t_b)?;
    if n == 0 {
        return Err(Error::TooShort {
            required: 1,
            got: 0,
        });
    }
    let a = absolute_moment_constant(1.0, k)?;
    let tau = (t_b - t_a) / n as f64;
    let var = model.sigma * model.sigma;
    let sum: f64 = (0..n)
        .map(|i| {
            let t = t_a + (t_b - t_a) * i as f64 / n as f64;
            pow(model.increment_variance(t, tau) / var, k / 2.0)
        })
        .sum();
    Ok(a * pow(model.sigma, k) * sum / n as f64)
}

/// Large-`N` equivalent of [`theoretical_moment`]:
/// `A(sigma,k) (t_b^e - t_a^e) / e (theta/theta')^{kH} (t_b - t_a)^{kH-1} N^{-kH}`
/// with `e = k(H' - H) + 1`.
pub fn asymptotic_moment(
    model: &ComposedModel,
    k: f64,
    n: usize,
    t_a: f64,
    t_b: f64,
) -> Result<f64> {
    model.validate()?;
    check_window(t_a, t_b)?;
    let e = k * (model.hurst_p - model.hurst) + 1.0;
    if fabs(e) < 1e-12 {
        return Err(Error::Singular);
    }
    let a = absolute_moment_constant(model.sigma, k)?;
    let kh = k * model.hurst;
    Ok(a * (pow(t_b, e) - pow(t_a, e)) / e
        * pow(model.theta / model.theta_p, kh)
        * pow(t_b - t_a, kh - 1.0)
        * pow(n as f64, -kh))
}

/// `(1/N) sum |S_i - S_{i-1}|^k` over the `N = len - 1` increments of an
/// equispaced series.
pub fn empirical_absolute_moment(series: &TimeSeries, k: f64) -> Result<f64> {
    check_positive("k", k)?;
    if series.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: series.len(),
        });
    }
    if !series.grid().is_equispaced() {
        return Err(Error::Grid("absolute moment needs an equispaced grid"));
    }
    let incs: Vec<f64> = series
        .values()
        .windows(2)
        .map(|w| pow(fabs(w[1] - w[0]), k))
        .collect();
    Ok(incs.iter().sum::<f64>() / incs.len() as f64)
}

/// Draws `Z` on the equispaced grid `t_a + i (t_b - t_a) / n`, `i = 0..=n`,
/// as `Z_t = t^h X_{t^{theta/theta'}}` with `X` an fBm of volatility `sigma`.
#[derive(Debug, Clone)]
pub struct ComposedSampler {
    fbm: PathSampler,
    factors: Vec<f64>,
}

impl ComposedSampler {
    pub fn new(model: &ComposedModel, n: usize, t_a: f64, t_b: f64) -> Result<Self> {
        model.validate()?;
        check_window(t_a, t_b)?;
        let mut factors = Vec::with_capacity(n + 1);
        let mut x_times = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = t_a + (t_b - t_a) * i as f64 / n as f64;
            let (factor, x_time) = composed_process_time_map(
                t,
                model.hurst,
                model.theta,
                model.hurst_p,
                model.theta_p,
            )?;
            factors.push(factor);
            x_times.push(x_time);
        }
        let params = ModelParams::affine(model.hurst, 1.0, model.sigma, 0.0)?;
        let fbm = PathSampler::new(&TimeGrid::new(x_times)?, &params, ProcessModel::Fbm)?;
        Ok(Self { fbm, factors })
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let x = self.fbm.sample(rng);
        x.values()
            .iter()
            .zip(&self.factors)
            .map(|(v, f)| v * f)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(h: f64, th: f64, hp: f64, thp: f64) -> ComposedModel {
        ComposedModel {
            hurst: h,
            theta: th,
            hurst_p: hp,
            theta_p: thp,
            sigma: 1.0,
        }
    }

    #[test]
    fn gaussian_absolute_moments() {
        assert!((absolute_moment_constant(1.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((absolute_moment_constant(1.7, 2.0).unwrap() - 1.7 * 1.7).abs() < 1e-13);
        let m1 = absolute_moment_constant(1.0, 1.0).unwrap();
        assert!((m1 - sqrt(2.0 / core::f64::consts::PI)).abs() < 1e-14);
        // E|G|^4 = 3
        assert!((absolute_moment_constant(1.0, 4.0).unwrap() - 3.0).abs() < 1e-13);
        assert!(absolute_moment_constant(0.0, 2.0).is_err());
        assert!(absolute_moment_constant(1.0, 0.0).is_err());
    }

    #[test]
    fn increment_variance_matches_direct_formula() {
        // the unrearranged closed form, fine when tau is not small
        let direct = |m: &ComposedModel, t: f64, tau: f64| {
            let h = h_exponent(m.hurst, m.theta, m.hurst_p, m.theta_p);
            let r = m.theta / m.theta_p;
            let s = t + tau;
            pow(s, 2.0 * m.hurst_p) + pow(t, 2.0 * m.hurst_p)
                - pow(s, h)
                    * pow(t, h)
                    * (pow(s, 2.0 * m.hurst * r) + pow(t, 2.0 * m.hurst * r)
                        - pow(fabs(pow(s, r) - pow(t, r)), 2.0 * m.hurst))
        };
        for m in [
            model(0.65, 30.0, 0.65, 30.0),
            model(0.3, 10.0, 0.7, 25.0),
            model(0.8, 5.0, 0.2, 2.0),
        ] {
            for &(t, tau) in &[(0.5, 0.3), (2.0, 1.0), (1.0, 0.05)] {
                let a = m.increment_variance(t, tau);
                let b = direct(&m, t, tau);
                assert!(
                    (a - b).abs() < 1e-12 * b.abs().max(1.0),
                    "{m:?} {t} {tau}: {a} {b}"
                );
            }
        }
    }

    #[test]
    fn increment_variance_at_origin() {
        let m = model(0.3, 10.0, 0.7, 25.0);
        assert!((m.increment_variance(0.0, 0.4) - pow(0.4, 1.4)).abs() < 1e-15);
    }

    #[test]
    fn matched_parameters_give_stationary_increments() {
        let m = model(0.65, 30.0, 0.65, 30.0);
        for t in [0.1, 1.0, 10.0, 1000.0] {
            let v = m.increment_variance(t, 0.25);
            assert!((v / pow(0.25, 1.3) - 1.0).abs() < 1e-10, "{t}: {v}");
        }
    }

    #[test]
    fn matched_parameters_theoretical_moment() {
        for k in [1.0, 2.0, 3.0] {
            let m = model(0.4, 7.0, 0.4, 7.0);
            let (ta, tb, n) = (0.5, 2.5, 40);
            let got = theoretical_moment(&m, k, n, ta, tb).unwrap();
            let expected =
                absolute_moment_constant(1.0, k).unwrap() * pow((tb - ta) / n as f64, k * 0.4);
            assert!((got / expected - 1.0).abs() < 1e-10);
            let asym = asymptotic_moment(&m, k, n, ta, tb).unwrap();
            assert!((asym / expected - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_increment_is_the_increment_variance() {
        let m = model(0.3, 10.0, 0.7, 25.0);
        let got = theoretical_moment(&m, 2.0, 1, 0.4, 1.1).unwrap();
        assert!((got - m.increment_variance(0.4, 0.7)).abs() < 1e-14);
    }

    #[test]
    fn asymptotic_singular_exponent() {
        // k (H' - H) + 1 = 0 with k = 2, H = 0.9, H' = 0.4
        let m = model(0.9, 1.0, 0.4, 1.0);
        assert_eq!(
            asymptotic_moment(&m, 2.0, 10, 1.0, 2.0),
            Err(Error::Singular)
        );
    }

    #[test]
    fn asymptotic_is_power_law_in_n() {
        let m = model(0.3, 10.0, 0.7, 25.0);
        let a = asymptotic_moment(&m, 2.0, 100, 0.5, 2.0).unwrap();
        let b = asymptotic_moment(&m, 2.0, 1000, 0.5, 2.0).unwrap();
        let slope = (libm::log(b) - libm::log(a)) / libm::log(10.0);
        assert!((slope + 0.6).abs() < 1e-12);
    }

    #[test]
    fn empirical_moment_trivial_cases() {
        let flat = TimeSeries::from_vecs(vec![0.0, 1.0, 2.0], vec![3.0; 3]).unwrap();
        assert_eq!(empirical_absolute_moment(&flat, 2.0).unwrap(), 0.0);
        let zigzag = TimeSeries::from_vecs(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(empirical_absolute_moment(&zigzag, 2.0).unwrap(), 1.0);
        let short = TimeSeries::from_vecs(vec![0.0], vec![0.0]).unwrap();
        assert!(empirical_absolute_moment(&short, 2.0).is_err());
        let uneven = TimeSeries::from_vecs(vec![0.0, 1.0, 3.0], vec![0.0; 3]).unwrap();
        assert!(empirical_absolute_moment(&uneven, 2.0).is_err());
    }
}
