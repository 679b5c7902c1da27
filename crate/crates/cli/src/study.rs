//! Monte Carlo study harness.
//!
//! Replication `r` draws its path from stream `(seed, r)` and its noise from
//! a separate stream, so every cell of a table sees the same underlying
//! Gaussian draws and results do not depend on scheduling. Wall times are
//! kept out of the replication and aggregate reports, which are therefore
//! byte-identical across reruns with the same configuration.

use std::path::Path;

use lamperti_core::aam::aam_diagnostics;
use lamperti_core::covariance::ProcessModel;
use lamperti_core::mle::fit_ml;
use lamperti_core::sim::{add_white_noise_with, replication_rng, PathSampler, StreamPurpose};
use lamperti_core::stats::{mean, median, std_dev};
use lamperti_core::{EstimationMethod, EstimationResult, ModelParams, TimeGrid, TimeSeries};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::estimate::{FitOptions, MethodChoice};
use crate::io::{output_path, Cell, Format, Table};
use crate::landscape::{evaluate_landscape, Axis, Landscape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StudyTable {
    T1,
    T2,
    T3,
    Timing,
    #[value(name = "t_aam_long")]
    TAamLong,
    Misspec,
    Landscape,
}

impl StudyTable {
    pub fn name(self) -> &'static str {
        match self {
            Self::T1 => "t1",
            Self::T2 => "t2",
            Self::T3 => "t3",
            Self::Timing => "timing",
            Self::TAamLong => "t_aam_long",
            Self::Misspec => "misspec",
            Self::Landscape => "landscape",
        }
    }
}

/// True parameters and length of one table row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub hurst: f64,
    pub theta: f64,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub table: StudyTable,
    pub replications: usize,
    pub step: f64,
    /// `sigma` and `mu` of every simulated path.
    pub sigma: f64,
    pub mu: f64,
    pub seed: u64,
    pub methods: MethodChoice,
    pub fit: FitOptions,
    /// Standard deviation of the noise added to the second series of each
    /// misspecification pair.
    pub noise_sd: f64,
    pub cells: Vec<CellSpec>,
    pub landscape_hurst: Axis,
    pub landscape_theta: Axis,
}

impl StudyConfig {
    /// Defaults reproducing the corresponding table. `hurst`, `theta` and
    /// `n_obs` fill whatever the table does not vary.
    pub fn for_table(
        table: StudyTable,
        hurst: Option<f64>,
        theta: Option<f64>,
        n_obs: Option<usize>,
    ) -> Self {
        let h = |d: f64| hurst.unwrap_or(d);
        let th = |d: f64| theta.unwrap_or(d);
        let n = |d: usize| n_obs.unwrap_or(d);
        let cell = |hurst, theta, n_obs| CellSpec {
            hurst,
            theta,
            n_obs,
        };
        let (replications, methods, cells) = match table {
            StudyTable::T1 => (
                100,
                MethodChoice::Both,
                vec![cell(h(0.65), th(30.0), n(200))],
            ),
            StudyTable::T2 => (
                100,
                MethodChoice::Both,
                [3.0, 10.0, 30.0, 50.0]
                    .map(|t| cell(h(0.65), t, n(200)))
                    .to_vec(),
            ),
            StudyTable::T3 => (
                100,
                MethodChoice::Both,
                [0.35, 0.5, 0.7, 0.8]
                    .map(|hh| cell(hh, th(30.0), n(50)))
                    .to_vec(),
            ),
            StudyTable::Timing => (
                10,
                MethodChoice::Both,
                match n_obs {
                    Some(n) => vec![cell(h(0.65), th(30.0), n)],
                    None => [25, 50, 75, 100, 150, 200, 300, 500, 1000]
                        .map(|n| cell(h(0.65), th(30.0), n))
                        .to_vec(),
                },
            ),
            StudyTable::TAamLong => (
                100,
                MethodChoice::Aam,
                [0.4, 0.55, 0.65, 0.75, 0.8]
                    .map(|hh| cell(hh, th(30.0), n(1000)))
                    .to_vec(),
            ),
            StudyTable::Misspec => (20, MethodChoice::Ml, vec![cell(h(0.5), th(30.0), n(200))]),
            StudyTable::Landscape => (1, MethodChoice::Both, vec![cell(h(0.65), th(30.0), n(200))]),
        };
        Self {
            table,
            replications,
            step: 0.001,
            sigma: 1.0,
            mu: 0.0,
            seed: 0,
            methods,
            fit: FitOptions::default(),
            noise_sd: 0.4,
            cells,
            landscape_hurst: Axis {
                lo: 0.3,
                hi: 0.95,
                n: 14,
                log: false,
            },
            landscape_theta: Axis {
                lo: 3.0,
                hi: 300.0,
                n: 15,
                log: true,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(CliError::Input("replications must be at least 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Input(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(CliError::Input(format!(
                "noise sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        for c in &self.cells {
            if c.n_obs < 2 {
                return Err(CliError::Input(format!(
                    "N must be at least 2, got {}",
                    c.n_obs
                )));
            }
            ModelParams::affine(c.hurst, c.theta, self.sigma, self.mu)?;
        }
        Ok(())
    }
}

/// One fit of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub cell: usize,
    pub replication: u64,
    pub method: EstimationMethod,
    pub outcome: std::result::Result<EstimationResult, String>,
}

/// Mean and standard deviation over the successful fits of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub cell: usize,
    pub method: EstimationMethod,
    pub successes: usize,
    pub failures: usize,
    pub mean_hurst: f64,
    pub sd_hurst: f64,
    pub mean_theta: f64,
    pub sd_theta: f64,
    pub mean_wall_time: f64,
}

/// ML fit of a series and the diagnostic at the fitted parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MisspecFit {
    pub hurst: f64,
    pub theta: f64,
    pub hurst_slope: f64,
    pub alpha: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisspecRecord {
    pub replication: u64,
    pub clean: std::result::Result<MisspecFit, String>,
    pub noisy: std::result::Result<MisspecFit, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyOutput {
    Fits {
        records: Vec<FitRecord>,
        aggregates: Vec<Aggregate>,
    },
    Misspec {
        records: Vec<MisspecRecord>,
        median_clean: f64,
        median_noisy: f64,
    },
    Landscape(Landscape),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub output: StudyOutput,
}

fn simulate(sampler: &PathSampler, config: &StudyConfig, replication: u64) -> TimeSeries {
    sampler.sample(&mut replication_rng(
        config.seed,
        replication,
        StreamPurpose::Path,
    ))
}

fn sampler_for(config: &StudyConfig, cell: &CellSpec) -> Result<PathSampler> {
    let grid = TimeGrid::equispaced(cell.n_obs, config.step)?;
    let params = ModelParams::affine(cell.hurst, cell.theta, config.sigma, config.mu)?;
    Ok(PathSampler::new(
        &grid,
        &params,
        ProcessModel::Delampertized,
    )?)
}

pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let output = match config.table {
        StudyTable::Misspec => run_misspec(config)?,
        StudyTable::Landscape => run_landscape(config)?,
        _ => run_fits(config)?,
    };
    Ok(StudyReport {
        config: config.clone(),
        output,
    })
}

fn run_fits(config: &StudyConfig) -> Result<StudyOutput> {
    let samplers = config
        .cells
        .iter()
        .map(|c| sampler_for(config, c))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..config.cells.len())
        .flat_map(|c| (0..config.replications as u64).map(move |r| (c, r)))
        .collect();
    let run = |&(cell, replication): &(usize, u64)| -> Vec<FitRecord> {
        let series = simulate(&samplers[cell], config, replication);
        config
            .methods
            .methods()
            .iter()
            .map(|&method| FitRecord {
                cell,
                replication,
                method,
                outcome: config.fit.fit(&series, method).map_err(|e| e.to_string()),
            })
            .collect()
    };
    // Timing runs one fit at a time so measurements do not compete.
    let records: Vec<FitRecord> = if config.table == StudyTable::Timing {
        jobs.iter().flat_map(run).collect()
    } else {
        jobs.par_iter().flat_map_iter(run).collect()
    };
    let aggregates = aggregate(config, &records);
    Ok(StudyOutput::Fits {
        records,
        aggregates,
    })
}

pub fn aggregate(config: &StudyConfig, records: &[FitRecord]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for cell in 0..config.cells.len() {
        for &method in config.methods.methods() {
            let fits: Vec<&EstimationResult> = records
                .iter()
                .filter(|r| r.cell == cell && r.method == method)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let total = records
                .iter()
                .filter(|r| r.cell == cell && r.method == method)
                .count();
            let hs: Vec<f64> = fits.iter().map(|f| f.hurst).collect();
            let ts: Vec<f64> = fits.iter().map(|f| f.theta).collect();
            let ws: Vec<f64> = fits.iter().map(|f| f.wall_time).collect();
            let stat =
                |xs: &[f64], f: fn(&[f64]) -> f64| if xs.is_empty() { f64::NAN } else { f(xs) };
            out.push(Aggregate {
                cell,
                method,
                successes: fits.len(),
                failures: total - fits.len(),
                mean_hurst: stat(&hs, mean),
                sd_hurst: stat(&hs, std_dev),
                mean_theta: stat(&ts, mean),
                sd_theta: stat(&ts, std_dev),
                mean_wall_time: stat(&ws, mean),
            });
        }
    }
    out
}

fn misspec_fit(
    series: &TimeSeries,
    config: &StudyConfig,
) -> std::result::Result<MisspecFit, String> {
    let fit = fit_ml(series, &config.fit.ml).map_err(|e| e.to_string())?;
    let d = aam_diagnostics(series, fit.hurst, fit.theta, &config.fit.aam.config)
        .map_err(|e| e.to_string())?;
    Ok(MisspecFit {
        hurst: fit.hurst,
        theta: fit.theta,
        hurst_slope: d.fit.hurst_slope,
        alpha: d.fit.alpha,
        score: d.slope_gap,
    })
}

fn run_misspec(config: &StudyConfig) -> Result<StudyOutput> {
    let cell = config
        .cells
        .first()
        .ok_or_else(|| CliError::Input("no cells to run".into()))?;
    let sampler = sampler_for(config, cell)?;
    let records: Vec<MisspecRecord> = (0..config.replications as u64)
        .into_par_iter()
        .map(|replication| {
            let clean = simulate(&sampler, config, replication);
            let mut rng = replication_rng(config.seed, replication, StreamPurpose::Noise);
            let noisy = add_white_noise_with(&clean, config.noise_sd, &mut rng)
                .expect("noise sd validated");
            MisspecRecord {
                replication,
                clean: misspec_fit(&clean, config),
                noisy: misspec_fit(&noisy, config),
            }
        })
        .collect();
    let med = |pick: fn(&MisspecRecord) -> Option<f64>| {
        let xs: Vec<f64> = records.iter().filter_map(pick).collect();
        if xs.is_empty() {
            f64::NAN
        } else {
            median(&xs)
        }
    };
    Ok(StudyOutput::Misspec {
        median_clean: med(|r| r.clean.as_ref().ok().map(|f| f.score)),
        median_noisy: med(|r| r.noisy.as_ref().ok().map(|f| f.score)),
        records,
    })
}

fn run_landscape(config: &StudyConfig) -> Result<StudyOutput> {
    let cell = config
        .cells
        .first()
        .ok_or_else(|| CliError::Input("no cells to run".into()))?;
    let series = simulate(&sampler_for(config, cell)?, config, 0);
    Ok(StudyOutput::Landscape(evaluate_landscape(
        &series,
        &config.landscape_hurst.points(),
        &config.landscape_theta.points(),
        &config.fit.aam.config,
    )))
}

fn cell_label(c: &CellSpec) -> String {
    format!("H={} theta={} N={}", c.hurst, c.theta, c.n_obs)
}

fn cell_cells(c: &CellSpec) -> [Cell; 4] {
    [
        cell_label(c).into(),
        c.hurst.into(),
        c.theta.into(),
        c.n_obs.into(),
    ]
}

fn misspec_cells(fit: &std::result::Result<MisspecFit, String>) -> Vec<Cell> {
    match fit {
        Ok(f) => vec![
            "ok".into(),
            f.hurst.into(),
            f.theta.into(),
            f.hurst_slope.into(),
            f.alpha.into(),
            f.score.into(),
            Cell::Empty,
        ],
        Err(e) => {
            let mut row = vec!["failed".into()];
            row.extend(std::iter::repeat_n(Cell::Empty, 5));
            row.push(e.clone().into());
            row
        }
    }
}

impl StudyReport {
    /// Named output tables; the names double as file stems.
    pub fn tables(&self) -> Vec<(String, Table)> {
        let cfg = &self.config;
        let name = cfg.table.name();
        match &self.output {
            StudyOutput::Fits {
                records,
                aggregates,
            } => {
                let mut reps = Table::new(&[
                    "cell",
                    "hurst_true",
                    "theta_true",
                    "n_obs",
                    "replication",
                    "seed",
                    "method",
                    "status",
                    "hurst",
                    "theta",
                    "objective",
                    "hurst_slope",
                    "alpha",
                    "iterations",
                    "converged",
                    "error",
                ]);
                let mut timing =
                    Table::new(&["cell", "n_obs", "replication", "method", "wall_time"]);
                for r in records {
                    let c = &cfg.cells[r.cell];
                    let mut row = cell_cells(c).to_vec();
                    row.extend([
                        r.replication.into(),
                        cfg.seed.into(),
                        r.method.as_str().into(),
                    ]);
                    match &r.outcome {
                        Ok(f) => {
                            row.extend([
                                "ok".into(),
                                f.hurst.into(),
                                f.theta.into(),
                                f.objective.into(),
                                Cell::opt(f.hurst_slope),
                                Cell::opt(f.alpha),
                                f.iterations.into(),
                                f.converged.into(),
                                Cell::Empty,
                            ]);
                            timing.push(vec![
                                cell_label(c).into(),
                                c.n_obs.into(),
                                r.replication.into(),
                                r.method.as_str().into(),
                                f.wall_time.into(),
                            ]);
                        }
                        Err(e) => {
                            row.push("failed".into());
                            row.extend(std::iter::repeat_n(Cell::Empty, 7));
                            row.push(e.clone().into());
                        }
                    }
                    reps.push(row);
                }
                let mut agg = Table::new(&[
                    "cell",
                    "hurst_true",
                    "theta_true",
                    "n_obs",
                    "method",
                    "successes",
                    "failures",
                    "mean_hurst",
                    "sd_hurst",
                    "mean_theta",
                    "sd_theta",
                ]);
                let mut timing_agg =
                    Table::new(&["cell", "n_obs", "method", "fits", "mean_wall_time"]);
                for a in aggregates {
                    let c = &cfg.cells[a.cell];
                    let mut row = cell_cells(c).to_vec();
                    row.extend([
                        a.method.as_str().into(),
                        a.successes.into(),
                        a.failures.into(),
                        a.mean_hurst.into(),
                        a.sd_hurst.into(),
                        a.mean_theta.into(),
                        a.sd_theta.into(),
                    ]);
                    agg.push(row);
                    timing_agg.push(vec![
                        cell_label(c).into(),
                        c.n_obs.into(),
                        a.method.as_str().into(),
                        a.successes.into(),
                        a.mean_wall_time.into(),
                    ]);
                }
                vec![
                    (format!("{name}_replications"), reps),
                    (format!("{name}_aggregate"), agg),
                    (format!("{name}_timing"), timing),
                    (format!("{name}_timing_aggregate"), timing_agg),
                ]
            }
            StudyOutput::Misspec {
                records,
                median_clean,
                median_noisy,
            } => {
                let mut reps = Table::new(&[
                    "replication",
                    "seed",
                    "series",
                    "status",
                    "hurst",
                    "theta",
                    "hurst_slope",
                    "alpha",
                    "score",
                    "error",
                ]);
                for r in records {
                    for (label, fit) in [("clean", &r.clean), ("noisy", &r.noisy)] {
                        let mut row: Vec<Cell> =
                            vec![r.replication.into(), cfg.seed.into(), label.into()];
                        row.extend(misspec_cells(fit));
                        reps.push(row);
                    }
                }
                let mut agg = Table::new(&["series", "successes", "median_score", "score_ratio"]);
                let count = |noisy: bool| {
                    records
                        .iter()
                        .filter(|r| {
                            if noisy {
                                r.noisy.is_ok()
                            } else {
                                r.clean.is_ok()
                            }
                        })
                        .count()
                };
                agg.push(vec![
                    "clean".into(),
                    count(false).into(),
                    (*median_clean).into(),
                    1.0.into(),
                ]);
                agg.push(vec![
                    "noisy".into(),
                    count(true).into(),
                    (*median_noisy).into(),
                    (median_noisy / median_clean).into(),
                ]);
                vec![
                    (format!("{name}_replications"), reps),
                    (format!("{name}_aggregate"), agg),
                ]
            }
            StudyOutput::Landscape(l) => vec![
                (name.to_owned(), l.table()),
                (format!("{name}_ridge"), l.ridge_table()),
                (format!("{name}_summary"), l.summary_table()),
            ],
        }
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        self.tables()
            .into_iter()
            .map(|(stem, table)| {
                let path = output_path(dir, &stem, format);
                table.write_file(&path, format)?;
                Ok(path)
            })
            .collect()
    }
}
