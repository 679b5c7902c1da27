//! Seeded exact simulation by covariance factorization.
//!
//! Every random draw comes from a ChaCha8 generator. Replication `r` of a
//! study seeded with `base` uses stream `16 * r + purpose` of the generator
//! seeded with `base`, so a replication's draws do not depend on how many
//! other replications ran, or in which order.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::{build_covariance_matrix, ProcessModel};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::params::{ModelParams, TimeGrid, TimeSeries};

/// What a generator stream is used for within one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Path = 0,
    Noise = 1,
}

/// Generator for `seed` on stream 0.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for one replication of a study.
pub fn replication_rng(base: u64, replication: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(replication.wrapping_mul(16).wrapping_add(purpose as u64));
    rng
}

/// Draws paths of one model on one grid, reusing the covariance factor.
#[derive(Debug, Clone)]
pub struct PathSampler {
    grid: TimeGrid,
    params: ModelParams,
    factor: Cholesky,
    // index of t = 0 for the fBm, pinned to zero
    origin: Option<usize>,
}

impl PathSampler {
    pub fn new(grid: &TimeGrid, params: &ModelParams, model: ProcessModel) -> Result<Self> {
        params.validate()?;
        let standard = ModelParams {
            sigma: 1.0,
            mu: 0.0,
            ..*params
        };
        let origin = match model {
            ProcessModel::Fbm => grid.times().iter().position(|&t| t == 0.0),
            ProcessModel::Delampertized => None,
        };
        let factor_grid = match origin {
            Some(i) => {
                let mut times = grid.times().to_vec();
                times.remove(i);
                if times.is_empty() {
                    None
                } else {
                    Some(TimeGrid::new(times)?)
                }
            }
            None => Some(grid.clone()),
        };
        let factor = match factor_grid {
            Some(g) => build_covariance_matrix(&g, &standard, model)?.factor()?,
            None => Cholesky::factor(&crate::linalg::SquareMatrix::zeros(0))?,
        };
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            factor,
            origin,
        })
    }

    /// Diagonal jitter used to factorize the covariance.
    pub fn jitter(&self) -> f64 {
        self.factor.jitter()
    }

    /// `mu + sigma * L g` with `g` standard Gaussian.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> TimeSeries {
        let g: Vec<f64> = (0..self.factor.dim())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let mut values: Vec<f64> = self
            .factor
            .mul_lower(&g)
            .into_iter()
            .map(|v| self.params.mu + self.params.sigma * v)
            .collect();
        if let Some(i) = self.origin {
            values.insert(i, 0.0);
        }
        TimeSeries::new(self.grid.clone(), values).expect("lengths match by construction")
    }
}

/// One seeded path. Identical inputs and seed give identical output.
pub fn sample_path(
    grid: &TimeGrid,
    params: &ModelParams,
    model: ProcessModel,
    seed: u64,
) -> Result<TimeSeries> {
    let sampler = PathSampler::new(grid, params, model)?;
    Ok(sampler.sample(&mut rng_from_seed(seed)))
}

/// Adds independent `N(0, noise_sd^2)` noise to every observation.
pub fn add_white_noise_with<R: RngCore + ?Sized>(
    series: &TimeSeries,
    noise_sd: f64,
    rng: &mut R,
) -> Result<TimeSeries> {
    if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
        return Err(Error::Domain {
            name: "noise_sd",
            value: noise_sd,
            expected: "finite and >= 0",
        });
    }
    if noise_sd == 0.0 {
        return Ok(series.clone());
    }
    Ok(series.map_values(|v| {
        let e: f64 = StandardNormal.sample(rng);
        v + noise_sd * e
    }))
}

pub fn add_white_noise(series: &TimeSeries, noise_sd: f64, seed: u64) -> Result<TimeSeries> {
    add_white_noise_with(series, noise_sd, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid200() -> TimeGrid {
        TimeGrid::equispaced(200, 0.001).unwrap()
    }

    #[test]
    fn same_seed_same_path() {
        let p = ModelParams::new(0.65, 30.0).unwrap();
        let a = sample_path(&grid200(), &p, ProcessModel::Delampertized, 7).unwrap();
        let b = sample_path(&grid200(), &p, ProcessModel::Delampertized, 7).unwrap();
        let c = sample_path(&grid200(), &p, ProcessModel::Delampertized, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn replication_streams_differ() {
        let mut a = replication_rng(1, 0, StreamPurpose::Path);
        let mut b = replication_rng(1, 1, StreamPurpose::Path);
        let mut c = replication_rng(1, 0, StreamPurpose::Noise);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
        assert_eq!(x, replication_rng(1, 0, StreamPurpose::Path).next_u64());
    }

    #[test]
    fn fbm_origin_is_pinned() {
        let grid = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let p = ModelParams::new(0.7, 1.0).unwrap();
        let s = sample_path(&grid, &p, ProcessModel::Fbm, 3).unwrap();
        assert_eq!(s.values()[0], 0.0);
        assert!(s.values()[1] != 0.0);
        let single =
            sample_path(&TimeGrid::new(vec![0.0]).unwrap(), &p, ProcessModel::Fbm, 3).unwrap();
        assert_eq!(single.values(), &[0.0]);
    }

    #[test]
    fn zero_noise_is_identity() {
        let p = ModelParams::new(0.5, 30.0).unwrap();
        let s = sample_path(&grid200(), &p, ProcessModel::Delampertized, 1).unwrap();
        assert_eq!(add_white_noise(&s, 0.0, 9).unwrap(), s);
        assert!(add_white_noise(&s, -1.0, 9).is_err());
    }

    #[test]
    fn noise_variance() {
        let s = TimeSeries::new(
            TimeGrid::equispaced(20_000, 1.0).unwrap(),
            vec![1.5; 20_000],
        )
        .unwrap();
        let noisy = add_white_noise(&s, 0.4, 11).unwrap();
        let diffs: Vec<f64> = noisy.values().iter().map(|v| v - 1.5).collect();
        let var = crate::stats::variance(&diffs);
        assert!((var / 0.16 - 1.0).abs() < 0.05, "{var}");
    }
}
