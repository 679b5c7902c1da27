use lamperti_core::aam::{fit_aam, AamOptions};
use lamperti_core::mle::{fit_ml, MlOptions};
use lamperti_core::{EstimationMethod, EstimationResult, TimeSeries};
use sha2::{Digest, Sha256};

use crate::io::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MethodChoice {
    Ml,
    Aam,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> &'static [EstimationMethod] {
        match self {
            Self::Ml => &[EstimationMethod::Ml],
            Self::Aam => &[EstimationMethod::Aam],
            Self::Both => &[EstimationMethod::Ml, EstimationMethod::Aam],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitOptions {
    pub ml: MlOptions,
    pub aam: AamOptions,
}

impl FitOptions {
    pub fn fit(
        &self,
        series: &TimeSeries,
        method: EstimationMethod,
    ) -> lamperti_core::Result<EstimationResult> {
        match method {
            EstimationMethod::Ml => fit_ml(series, &self.ml),
            EstimationMethod::Aam => fit_aam(series, &self.aam),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub const ESTIMATE_COLUMNS: &[&str] = &[
    "input_sha256",
    "method",
    "hurst",
    "theta",
    "objective",
    "hurst_slope",
    "alpha",
    "iterations",
    "converged",
    "wall_time",
];

pub fn estimate_table(input_hash: &str, results: &[EstimationResult]) -> Table {
    let mut t = Table::new(ESTIMATE_COLUMNS);
    for r in results {
        t.push(vec![
            input_hash.into(),
            r.method.as_str().into(),
            r.hurst.into(),
            r.theta.into(),
            r.objective.into(),
            Cell::opt(r.hurst_slope),
            Cell::opt(r.alpha),
            r.iterations.into(),
            r.converged.into(),
            r.wall_time.into(),
        ]);
    }
    t
}
