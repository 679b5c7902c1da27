use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or method parameter lies outside its admissible domain.
    #[error("parameter `{name}` out of domain: {value} ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid time grid: {0}")]
    Grid(&'static str),

    #[error("series has {values} values for {times} times")]
    LengthMismatch { times: usize, values: usize },

    #[error("need at least {required} observations, got {got}")]
    TooShort { required: usize, got: usize },

    /// The covariance matrix could not be factorized, even after adding the
    /// largest allowed diagonal jitter.
    #[error(
        "covariance matrix not positive definite (failed at pivot {pivot}, max jitter {jitter:e})"
    )]
    Conditioning { pivot: usize, jitter: f64 },

    /// `exp(theta' * t)` would overflow in the direct Lamperti transform.
    #[error(
        "exponential overflow in Lamperti transform at index {index} (theta' * t = {exponent})"
    )]
    Range { index: usize, exponent: f64 },

    /// The scale grid collapsed to a single point.
    #[error("scale grid span collapsed: smallest {lo:e}, largest {hi:e}")]
    ScaleSpan { lo: f64, hi: f64 },

    /// No pair of observations falls in the kernel support of a scale.
    #[error("zero total kernel weight at scale {scale:e} (index {index})")]
    ZeroWeight { index: usize, scale: f64 },

    #[error("regression needs at least 3 usable points, got {usable}")]
    Regression { usable: usize },

    /// The singular exponent `k(H' - H) + 1 = 0` of the asymptotic moment.
    #[error("asymptotic moment undefined: k(H' - H) + 1 = 0")]
    Singular,

    #[error("objective is not finite at any initial simplex vertex")]
    SimplexInit,

    /// The AAM optimum sits where `theta' * t` reaches the overflow limit of
    /// the transform instead of at an interior minimum.
    #[error("AAM optimum at the overflow limit of the Lamperti transform (theta' = {theta})")]
    OverflowBoundary { theta: f64 },
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "0 < value < 1",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}
