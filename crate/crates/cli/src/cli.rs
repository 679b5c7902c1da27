use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lamperti_core::aam::{AamConfig, KernelFamily, KernelSpec};
use lamperti_core::covariance::ProcessModel;
use lamperti_core::sim::{add_white_noise_with, replication_rng, PathSampler, StreamPurpose};
use lamperti_core::simplex::SimplexOptions;
use lamperti_core::{ModelParams, TimeGrid};

use crate::diagnose::diagnose;
use crate::error::{CliError, Result};
use crate::estimate::{estimate_table, sha256_hex, FitOptions, MethodChoice};
use crate::io::{loglog_table, read_series, series_table, Format, Table};
use crate::landscape::{evaluate_landscape, Axis};
use crate::study::{run_study, StudyConfig, StudyTable};

#[derive(Debug, Parser)]
#[command(
    name = "lamperti",
    version,
    about = "Simulate and estimate delampertized fractional Brownian motion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded sample paths as `time,value` series.
    Simulate(SimulateArgs),
    /// Estimate (H, theta) of a series file.
    Estimate(EstimateArgs),
    /// Run a replication study and write per-replication and aggregate reports.
    Study(StudyArgs),
    /// Log-log plots of a series and of its Lamperti transform.
    Diagnose(DiagnoseArgs),
    /// Log-likelihood and AAM objective on an (H, theta) grid.
    Landscape(LandscapeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Epanechnikov,
    TruncatedGaussian,
    Box,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Epanechnikov => Self::Epanechnikov,
            KernelArg::TruncatedGaussian => Self::TruncatedGaussian,
            KernelArg::Box => Self::Box,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AamArgs {
    /// Largest scale as a fraction of the series length.
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
    /// Number of scales in the log-log regression.
    #[arg(long = "n-scales", default_value_t = 15)]
    pub n_scales: usize,
    #[arg(long, value_enum, default_value = "epanechnikov")]
    pub kernel: KernelArg,
    /// Fixed kernel half-width in transformed time (default: per scale).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Place the scale grid with this theta instead of the trial theta'.
    #[arg(long = "scale-anchor")]
    pub scale_anchor: Option<f64>,
    /// Run the simplex from three starting points and polish the best.
    #[arg(long = "multi-start")]
    pub multi_start: bool,
}

impl AamArgs {
    pub fn config(&self) -> Result<AamConfig> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(CliError::Input(format!(
                "--rho must be in (0, 1), got {}",
                self.rho
            )));
        }
        if self.n_scales < 3 {
            return Err(CliError::Input(format!(
                "--n-scales must be at least 3, got {}",
                self.n_scales
            )));
        }
        if let Some(b) = self.bandwidth {
            if !(b > 0.0 && b.is_finite()) {
                return Err(CliError::Input(format!(
                    "--bandwidth must be positive, got {b}"
                )));
            }
        }
        if let Some(a) = self.scale_anchor {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Input(format!(
                    "--scale-anchor must be positive, got {a}"
                )));
            }
        }
        Ok(AamConfig {
            rho: self.rho,
            scale_anchor: self.scale_anchor,
            n_scales: self.n_scales,
            kernel: KernelSpec {
                family: self.kernel.into(),
                bandwidth: self.bandwidth,
            },
            ..AamConfig::default()
        })
    }

    pub fn fit_options(&self) -> Result<FitOptions> {
        let mut fit = FitOptions::default();
        fit.aam.config = self.config()?;
        if self.multi_start {
            fit.ml.simplex = SimplexOptions::default().with_multi_start();
            fit.aam.simplex = fit.aam.simplex.clone().with_multi_start();
        }
        Ok(fit)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "H", default_value_t = 0.65)]
    pub hurst: f64,
    #[arg(long, default_value_t = 30.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long = "n-obs", default_value_t = 200)]
    pub n_obs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    /// Standard deviation of additive white noise.
    #[arg(long = "noise-sd", default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// Output file; a directory when `--replications` exceeds 1. Stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Series file (`time,value` CSV, or JSON lines with a .jsonl extension).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub method: MethodChoice,
    #[command(flatten)]
    pub aam: AamArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, value_enum)]
    pub table: StudyTable,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long = "n-obs")]
    pub n_obs: Option<usize>,
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    #[arg(long = "H")]
    pub hurst: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Noise added to the second series of each misspecification pair.
    #[arg(long = "noise-sd", default_value_t = 0.4)]
    pub noise_sd: f64,
    /// H axis of the landscape table, `lo:hi:n`.
    #[arg(long = "h-grid")]
    pub h_grid: Option<String>,
    /// theta axis of the landscape table, `lo:hi:n` or `log:lo:hi:n`.
    #[arg(long = "theta-grid")]
    pub theta_grid: Option<String>,
    #[command(flatten)]
    pub aam: AamArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub input: PathBuf,
    /// Trial H' of the transform.
    #[arg(long = "H", requires = "theta", conflicts_with = "from_ml")]
    pub hurst: Option<f64>,
    /// Trial theta' of the transform.
    #[arg(long, requires = "hurst")]
    pub theta: Option<f64>,
    /// Take (H', theta') from a maximum-likelihood fit.
    #[arg(long = "from-ml", required_unless_present = "hurst")]
    pub from_ml: bool,
    #[command(flatten)]
    pub aam: AamArgs,
    /// Log-log plot of the transformed series; the raw-series plot goes
    /// next to it with a `_raw` suffix.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    pub input: PathBuf,
    #[arg(long = "h-grid", default_value = "0.3:0.95:14")]
    pub h_grid: String,
    #[arg(long = "theta-grid", default_value = "log:3:300:15")]
    pub theta_grid: String,
    #[command(flatten)]
    pub aam: AamArgs,
    /// Grid file; the ridge table goes next to it with a `_ridge` suffix and the summary to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Study(a) => study(a),
        Command::Diagnose(a) => diagnose_cmd(a),
        Command::Landscape(a) => landscape(a),
    }
}

/// `dir/stem<suffix>.ext` next to `path`.
fn sibling(path: &Path, suffix: &str, format: Format) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}.{}", format.extension()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    if a.replications == 0 {
        return Err(CliError::Input("--replications must be at least 1".into()));
    }
    if a.replications > 1 && a.out.is_none() {
        return Err(CliError::Input(
            "--out DIR is required with several replications".into(),
        ));
    }
    if !(a.noise_sd >= 0.0 && a.noise_sd.is_finite()) {
        return Err(CliError::Input(format!(
            "--noise-sd must be >= 0, got {}",
            a.noise_sd
        )));
    }
    let params = ModelParams::affine(a.hurst, a.theta, a.sigma, a.mu)?;
    let grid = TimeGrid::equispaced(a.n_obs, a.step)?;
    let sampler = PathSampler::new(&grid, &params, ProcessModel::Delampertized)?;
    if a.replications > 1 {
        let dir = a.out.as_deref().expect("checked above");
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    for r in 0..a.replications as u64 {
        let path = sampler.sample(&mut replication_rng(a.seed, r, StreamPurpose::Path));
        let mut noise_rng = replication_rng(a.seed, r, StreamPurpose::Noise);
        let series = add_white_noise_with(&path, a.noise_sd, &mut noise_rng)?;
        let out = match &a.out {
            Some(dir) if a.replications > 1 => {
                Some(dir.join(format!("path_{r:04}.{}", a.format.extension())))
            }
            other => other.clone(),
        };
        series_table(&series).emit(out.as_deref(), a.format)?;
    }
    Ok(())
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let bytes = std::fs::read(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let series = read_series(&a.input)?;
    let fit = a.aam.fit_options()?;
    let results = a
        .method
        .methods()
        .iter()
        .map(|&m| fit.fit(&series, m))
        .collect::<lamperti_core::Result<Vec<_>>>()?;
    estimate_table(&sha256_hex(&bytes), &results).emit(a.out.as_deref(), a.format)
}

fn study(a: StudyArgs) -> Result<()> {
    let mut config = StudyConfig::for_table(a.table, a.hurst, a.theta, a.n_obs);
    if let Some(r) = a.replications {
        config.replications = r;
    }
    if let Some(m) = a.method {
        config.methods = m;
    }
    config.step = a.step;
    config.sigma = a.sigma;
    config.mu = a.mu;
    config.seed = a.seed;
    config.noise_sd = a.noise_sd;
    config.fit = a.aam.fit_options()?;
    if let Some(g) = &a.h_grid {
        config.landscape_hurst = Axis::parse(g)?;
    }
    if let Some(g) = &a.theta_grid {
        config.landscape_theta = Axis::parse(g)?;
    }
    let report = run_study(&config)?;
    for path in report.write(&a.out, a.format)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn diagnose_cmd(a: DiagnoseArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let fit = a.aam.fit_options()?;
    let params = a.hurst.zip(a.theta);
    let d = diagnose(&series, params, &fit.aam.config, &fit.ml)?;
    if let Some(out) = &a.out {
        loglog_table(&d.transformed.plot).write_file(out, a.format)?;
        loglog_table(&d.raw).write_file(&sibling(out, "_raw", a.format), a.format)?;
    }
    d.summary_table().emit(None, a.format)
}

fn landscape(a: LandscapeArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let config = a.aam.config()?;
    let hs = Axis::parse(&a.h_grid)?.points();
    let ts = Axis::parse(&a.theta_grid)?.points();
    let l = evaluate_landscape(&series, &hs, &ts, &config);
    match &a.out {
        Some(out) => {
            l.table().write_file(out, a.format)?;
            l.ridge_table()
                .write_file(&sibling(out, "_ridge", a.format), a.format)?;
            l.summary_table().emit(None, a.format)
        }
        None => {
            l.table().emit(None, a.format)?;
            let summary: Table = l.summary_table();
            summary
                .write(std::io::stderr().lock(), a.format)
                .map_err(|e| CliError::io("<stderr>", e))
        }
    }
}
