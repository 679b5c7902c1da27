//! Dense symmetric matrices and Cholesky factorization with diagonal jitter.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Diagonal jitter schedule tried in order when a factorization fails.
pub const JITTER_SCHEDULE: [f64; 6] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Symmetric matrix filled from `f(i, j)` evaluated on the lower triangle.
    pub fn from_symmetric_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Lower Cholesky factor `L` with `L L^T = A + jitter * I`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
    jitter: f64,
}

impl Cholesky {
    /// Factorizes `a`, escalating the diagonal jitter through
    /// [`JITTER_SCHEDULE`] (scaled by the largest diagonal entry) until the
    /// factorization succeeds.
    pub fn factor(a: &SquareMatrix) -> Result<Self> {
        let scale = (0..a.n).map(|i| a.get(i, i)).fold(0.0_f64, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut last_pivot = 0;
        for eps in JITTER_SCHEDULE {
            match Self::factor_with_jitter(a, eps * scale) {
                Ok(c) => return Ok(c),
                Err(pivot) => last_pivot = pivot,
            }
        }
        Err(Error::Conditioning {
            pivot: last_pivot,
            jitter: JITTER_SCHEDULE[JITTER_SCHEDULE.len() - 1] * scale,
        })
    }

    /// Single factorization attempt; on failure returns the failing pivot.
    pub fn factor_with_jitter(a: &SquareMatrix, jitter: f64) -> core::result::Result<Self, usize> {
        let n = a.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (row_i, row_j) = (i * n, j * n);
                let mut s = a.data[row_i + j];
                // contiguous row dot product over the already computed columns
                for k in 0..j {
                    s -= l[row_i + k] * l[row_j + k];
                }
                if i == j {
                    let d = s + jitter;
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(i);
                    }
                    l[row_i + i] = libm::sqrt(d);
                } else {
                    l[row_i + j] = s / l[row_j + j];
                }
            }
        }
        Ok(Self {
            n,
            lower: l,
            jitter,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that was added before the successful factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// `ln det(A)` from the factor diagonal.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n)
            .map(|i| libm::log(self.lower[i * self.n + i]))
            .sum::<f64>()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, y)| l * y).sum();
            y[i] = (b[i] - s) / self.lower[i * n + i];
        }
        y
    }

    /// `b^T A^{-1} b = |L^{-1} b|^2`.
    pub fn inverse_quadratic_form(&self, b: &[f64]) -> f64 {
        self.solve_lower(b).iter().map(|y| y * y).sum()
    }

    /// `L g`.
    pub fn mul_lower(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.n);
        let n = self.n;
        (0..n)
            .map(|i| {
                self.lower[i * n..=i * n + i]
                    .iter()
                    .zip(g)
                    .map(|(l, g)| l * g)
                    .sum()
            })
            .collect()
    }
}
