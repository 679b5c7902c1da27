//! Simulation and parameter estimation for the delampertized fractional
//! Brownian motion: the stationary process obtained by applying the inverse
//! Lamperti transform (with a linear time contraction `theta`) to an fBm of
//! Hurst exponent `H`.
//!
//! Two estimators of `(H, theta)` are provided:
//!
//! - [`mle::fit_ml`]: exact Gaussian maximum likelihood, using a Cholesky
//!   factorization of the stationary covariance.
//! - [`aam::fit_aam`]: the adapted absolute-moment method, which Lamperti
//!   transforms the data with trial parameters and looks for the pair that
//!   makes the log-log plot of kernel-smoothed second moments affine with
//!   slope `2H'`.
//!
//! Both are driven by the two-parameter Nelder-Mead engine in [`simplex`].
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! adds wall-clock timing of the fits.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod aam;
pub mod covariance;
pub mod error;
pub mod lamperti;
pub mod linalg;
pub mod mle;
pub mod params;
pub mod sim;
pub mod simplex;
pub mod stats;

mod clock;

pub use error::{Error, Result};
pub use params::{EstimationMethod, EstimationResult, ModelParams, TimeGrid, TimeSeries};
