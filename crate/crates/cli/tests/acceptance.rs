use std::process::ExitCode;
use std::time::Instant;

use lamperti_cli::io::Format;
use lamperti_cli::study::{
    run_study, Aggregate, StudyConfig, StudyOutput, StudyReport, StudyTable,
};
use lamperti_core::aam::{
    aam_diagnostics, absolute_moment_constant, asymptotic_moment, build_scale_grid,
    theoretical_moment, AamConfig, ComposedModel, ComposedSampler,
};
use lamperti_core::covariance::{build_covariance_matrix, ProcessModel};
use lamperti_core::lamperti::{lamperti_direct_series, lamperti_inverse_series};
use lamperti_core::mle::log_likelihood_affine;
use lamperti_core::sim::{replication_rng, rng_from_seed, PathSampler, StreamPurpose};
use lamperti_core::simplex::{nelder_mead, ConstraintMode, Direction, ParamPoint, SimplexOptions};
use lamperti_core::stats::{mean, std_dev};
use lamperti_core::{EstimationMethod, ModelParams, TimeGrid, TimeSeries};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn study(
    table: StudyTable,
    n_obs: Option<usize>,
    replications: Option<usize>,
) -> Result<StudyReport, String> {
    let mut config = StudyConfig::for_table(table, None, None, n_obs);
    if let Some(r) = replications {
        config.replications = r;
    }
    run_study(&config).map_err(|e| e.to_string())
}

fn aggregates(report: &StudyReport) -> &[Aggregate] {
    match &report.output {
        StudyOutput::Fits { aggregates, .. } => aggregates,
        _ => unreachable!(),
    }
}

fn row(report: &StudyReport, cell: usize, method: EstimationMethod) -> &Aggregate {
    aggregates(report)
        .iter()
        .find(|a| a.cell == cell && a.method == method)
        .unwrap()
}

fn column(report: &StudyReport, method: EstimationMethod) -> Vec<&Aggregate> {
    (0..report.config.cells.len())
        .map(|c| row(report, c, method))
        .collect()
}

fn increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

fn table_1() -> Outcome {
    let report = study(StudyTable::T1, None, None)?;
    let ml = row(&report, 0, EstimationMethod::Ml);
    let aam = row(&report, 0, EstimationMethod::Aam);
    let within = |x: f64, target: f64| (x / target - 1.0).abs() <= 0.5;
    let ok = (ml.mean_hurst - 0.659).abs() <= 0.05
        && (0.04..=0.17).contains(&ml.sd_hurst)
        && (aam.mean_hurst - 0.651).abs() <= 0.08
        && within(ml.mean_theta, 36.7)
        && within(aam.mean_theta, 34.6);
    check(
        ok,
        format!(
            "ML H {:.3} (sd {:.3}) theta {:.1}; AAM H {:.3} theta {:.1} ({} ok, {} failed)",
            ml.mean_hurst,
            ml.sd_hurst,
            ml.mean_theta,
            aam.mean_hurst,
            aam.mean_theta,
            aam.successes,
            aam.failures
        ),
    )
}

fn table_2() -> Outcome {
    let report = study(StudyTable::T2, None, None)?;
    let ml = column(&report, EstimationMethod::Ml);
    let aam = column(&report, EstimationMethod::Aam);
    let truth: Vec<f64> = report.config.cells.iter().map(|c| c.theta).collect();
    let means: Vec<f64> = ml.iter().map(|a| a.mean_theta).collect();
    let close = means
        .iter()
        .zip(&truth)
        .filter(|(_, &t)| t >= 10.0)
        .all(|(m, t)| (m / t - 1.0).abs() <= 0.4);
    let tighter = ml
        .iter()
        .zip(&aam)
        .filter(|(m, a)| m.sd_theta < a.sd_theta)
        .count();
    let ml_sd: Vec<String> = ml.iter().map(|a| format!("{:.1}", a.sd_theta)).collect();
    let aam_sd: Vec<String> = aam.iter().map(|a| format!("{:.1}", a.sd_theta)).collect();
    check(
        increasing(&means) && close && tighter >= 3,
        format!("ML theta means {means:.1?}; sd ML {ml_sd:?} vs AAM {aam_sd:?}"),
    )
}

fn table_3() -> Outcome {
    let report = study(StudyTable::T3, None, None)?;
    let truth: Vec<f64> = report.config.cells.iter().map(|c| c.hurst).collect();
    let ml: Vec<f64> = column(&report, EstimationMethod::Ml)
        .iter()
        .map(|a| a.mean_hurst)
        .collect();
    let aam: Vec<f64> = column(&report, EstimationMethod::Aam)
        .iter()
        .map(|a| a.mean_hurst)
        .collect();
    let unbiased = ml.iter().zip(&truth).all(|(m, h)| (m - h).abs() <= 0.06);
    let shrinks = aam[0] > truth[0] && aam[3] < truth[3];
    check(
        increasing(&ml) && increasing(&aam) && unbiased && shrinks,
        format!("ML H {ml:.3?}; AAM H {aam:.3?}"),
    )
}

fn timing() -> Outcome {
    let times = |n: usize, reps: usize| -> Result<(f64, f64), String> {
        let report = study(StudyTable::Timing, Some(n), Some(reps))?;
        Ok((
            row(&report, 0, EstimationMethod::Ml).mean_wall_time,
            row(&report, 0, EstimationMethod::Aam).mean_wall_time,
        ))
    };
    let (ml_long, aam_long) = times(1000, 2)?;
    let (ml_short, aam_short) = times(25, 10)?;
    let ratio_short = ml_short.max(aam_short) / ml_short.min(aam_short);
    check(
        aam_long <= ml_long / 20.0 && ratio_short <= 10.0,
        format!(
            "N=1000 ML {ml_long:.3}s AAM {aam_long:.4}s (x{:.0}); N=25 ML {ml_short:.5}s AAM {aam_short:.5}s",
            ml_long / aam_long
        ),
    )
}

fn moments() -> Outcome {
    let hursts = [(0.3, 0.5), (0.65, 0.65), (0.7, 0.4)];
    let thetas = [(30.0, 25.0), (10.0, 10.0), (5.0, 40.0)];
    let (n, t_a, t_b, draws) = (16, 1.0, 3.0, 4000);
    let mut rng = rng_from_seed(5);
    let mut worst_z: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    for &(hurst, hurst_p) in &hursts {
        for &(theta, theta_p) in &thetas {
            let model = ComposedModel {
                hurst,
                theta,
                hurst_p,
                theta_p,
                sigma: 1.0,
            };
            let sampler = ComposedSampler::new(&model, n, t_a, t_b).map_err(|e| e.to_string())?;
            let paths: Vec<Vec<f64>> = (0..draws).map(|_| sampler.sample(&mut rng)).collect();
            for k in [1.0, 2.0] {
                let m: Vec<f64> = paths
                    .iter()
                    .map(|z| {
                        z.windows(2)
                            .map(|w| (w[1] - w[0]).abs().powf(k))
                            .sum::<f64>()
                            / n as f64
                    })
                    .collect();
                let exact =
                    theoretical_moment(&model, k, n, t_a, t_b).map_err(|e| e.to_string())?;
                let se = std_dev(&m) / (draws as f64).sqrt();
                worst_z = worst_z.max((mean(&m) - exact).abs() / se);

                let big =
                    theoretical_moment(&model, k, 10_000, 1.0, 2.0).map_err(|e| e.to_string())?;
                let limit =
                    asymptotic_moment(&model, k, 10_000, 1.0, 2.0).map_err(|e| e.to_string())?;
                worst_ratio = worst_ratio.max((big / limit - 1.0).abs());
                // centred log-log derivative at N = 10^4
                let lo =
                    theoretical_moment(&model, k, 3_162, 1.0, 2.0).map_err(|e| e.to_string())?;
                let hi =
                    theoretical_moment(&model, k, 31_623, 1.0, 2.0).map_err(|e| e.to_string())?;
                let slope = (hi.ln() - lo.ln()) / (31_623f64 / 3_162.0).ln();
                worst_slope = worst_slope.max((slope + k * hurst).abs());
            }
        }
    }
    check(
        worst_z <= 3.0 && worst_ratio <= 0.01 && worst_slope <= 0.01,
        format!(
            "max |MC - exact| {worst_z:.2} SE; max |ratio - 1| {worst_ratio:.4}; max slope error {worst_slope:.4}"
        ),
    )
}

fn misspecification() -> Outcome {
    let report = study(StudyTable::Misspec, None, None)?;
    let StudyOutput::Misspec {
        records,
        median_clean,
        median_noisy,
    } = &report.output
    else {
        unreachable!()
    };
    let pairs = records
        .iter()
        .filter(|r| r.clean.is_ok() && r.noisy.is_ok())
        .count();
    let ratio = median_noisy / median_clean;
    check(
        ratio >= 5.0,
        format!("median score clean {median_clean:.4}, noisy {median_noisy:.4}, ratio {ratio:.2} ({pairs} pairs)"),
    )
}

fn random_grid<R: Rng>(rng: &mut R, n: usize) -> TimeGrid {
    let mut t = rng.random_range(0.0..1.0);
    TimeGrid::new(
        (0..n)
            .map(|_| {
                t += rng.random_range(1e-3..0.2);
                t
            })
            .collect(),
    )
    .unwrap()
}

fn dense(grid: &TimeGrid, params: &ModelParams) -> DMatrix<f64> {
    let c = build_covariance_matrix(grid, params, ProcessModel::Delampertized).unwrap();
    DMatrix::from_fn(c.dim(), c.dim(), |i, j| c.get(i, j))
}

/// Observations whose transform with `(hurst_p, theta_p)` consists of
/// isolated pairs with squared increments exactly `d^{2H'}`.
fn exact_power_law_series(durations: &[f64], hurst_p: f64, theta_p: f64) -> TimeSeries {
    let gap = 10.0 * durations.iter().cloned().fold(0.0, f64::max) + 10.0;
    let mut times = vec![];
    let mut values = vec![];
    for (c, &d) in durations.iter().enumerate() {
        let base = 1.0 + gap * c as f64;
        for (t_p, s_p) in [(base, 0.0), (base + d, d.powf(hurst_p))] {
            let t: f64 = t_p.ln() / theta_p;
            times.push(t);
            values.push(s_p * (-theta_p * hurst_p * t).exp());
        }
    }
    TimeSeries::from_vecs(times, values).unwrap()
}

fn properties() -> Outcome {
    let mut rng = rng_from_seed(11);
    let mut failures = vec![];

    for _ in 0..200 {
        let n = rng.random_range(2..25);
        let grid = random_grid(&mut rng, n);
        let params =
            ModelParams::new(rng.random_range(0.05..0.95), rng.random_range(0.1..100.0)).unwrap();
        let m = dense(&grid, &params);
        let n = m.nrows();
        let symmetric = (0..n).all(|i| m[(i, i)] == 1.0 && (0..n).all(|j| m[(i, j)] == m[(j, i)]));
        let min_eig = SymmetricEigen::new(m).eigenvalues.min();
        if !symmetric || min_eig < -1e-10 * n as f64 {
            failures.push("covariance");
            break;
        }
    }

    for _ in 0..200 {
        let grid = random_grid(&mut rng, 30);
        let (hurst_p, theta_p) = (rng.random_range(0.05..0.95), rng.random_range(0.1..20.0));
        let values: Vec<f64> = (0..30).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y = TimeSeries::new(grid, values).unwrap();
        let back = lamperti_direct_series(&y, hurst_p, theta_p)
            .and_then(|z| lamperti_inverse_series(&z, hurst_p, theta_p))
            .unwrap();
        let close = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= 1e-10 * x.abs().max(1.0))
        };
        if !close(y.times(), back.times()) || !close(y.values(), back.values()) {
            failures.push("lamperti round trip");
            break;
        }
    }

    let mut compared = 0;
    for _ in 0..300 {
        let n = rng.random_range(1..=8);
        let grid = random_grid(&mut rng, n);
        let (hurst, theta) = (rng.random_range(0.1..0.9), rng.random_range(0.5..50.0));
        let (mu, sigma) = (rng.random_range(-1.0..1.0), rng.random_range(0.3..3.0));
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let series = TimeSeries::new(grid, values).unwrap();
        let Ok(fast) = log_likelihood_affine(&series, hurst, theta, mu, sigma) else {
            continue;
        };
        let m = dense(series.grid(), &ModelParams::new(hurst, theta).unwrap());
        let det = m.determinant();
        if fast.jitter_used != 0.0 || det <= 1e-12 {
            continue;
        }
        compared += 1;
        let x = DVector::from_iterator(n, series.values().iter().map(|s| s - mu));
        let quad = (x.transpose() * m.try_inverse().unwrap() * &x)[(0, 0)];
        let naive = -0.5 * det.ln()
            - 0.5 * n as f64 * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
            - 0.5 * quad / (sigma * sigma);
        if (fast.value - naive).abs() > 1e-8 * naive.abs().max(1.0) {
            failures.push("likelihood");
            break;
        }
    }
    if compared < 100 {
        failures.push("likelihood coverage");
    }

    for sigma in [1e-3, 0.37, 1.0, 2.5, 1e3] {
        if (absolute_moment_constant(sigma, 2.0).unwrap() / (sigma * sigma) - 1.0).abs() > 1e-12 {
            failures.push("A(sigma, 2)");
        }
    }

    for (hurst_p, theta_p) in [(0.3, 30.0), (0.65, 30.0), (0.8, 12.0)] {
        let config = AamConfig {
            step: Some(0.001),
            ..AamConfig::default()
        };
        let scales = build_scale_grid(theta_p, 0.001, 30, config.rho, config.n_scales).unwrap();
        let durations: Vec<f64> = scales.scales().iter().map(|t| t * 1.001).collect();
        let d = aam_diagnostics(
            &exact_power_law_series(&durations, hurst_p, theta_p),
            hurst_p,
            theta_p,
            &config,
        );
        if !d.is_ok_and(|d| d.objective < 1e-6 && (d.fit.alpha - 1.0).abs() < 1e-6) {
            failures.push("exact power law");
        }
    }

    for mode in [ConstraintMode::Transform, ConstraintMode::Box] {
        let opts = SimplexOptions {
            constraints: mode,
            tolerance: 1e-8,
            ..Default::default()
        };
        let quadratic = |p: ParamPoint| (p.hurst - 0.5).powi(2) + (p.theta - 30.0).powi(2);
        let out = nelder_mead(quadratic, Direction::Minimize, &opts).unwrap();
        if (out.best.hurst - 0.5).abs() >= 1e-3 || (out.best.theta - 30.0).abs() >= 1e-3 {
            failures.push("nelder-mead");
        }
    }

    let grid = TimeGrid::equispaced(200, 0.001).unwrap();
    let sampler = PathSampler::new(
        &grid,
        &ModelParams::affine(0.65, 30.0, 1.0, 0.0).unwrap(),
        ProcessModel::Delampertized,
    )
    .unwrap();
    let draw = || sampler.sample(&mut replication_rng(3, 7, StreamPurpose::Path));
    if draw() != draw() {
        failures.push("path rerun");
    }
    let rerun = || -> Vec<Vec<u8>> {
        let mut config = StudyConfig::for_table(StudyTable::T3, None, None, Some(30));
        config.replications = 3;
        let dir = tempfile::tempdir().unwrap();
        run_study(&config)
            .unwrap()
            .write(dir.path(), Format::Csv)
            .unwrap();
        ["t3_replications.csv", "t3_aggregate.csv"]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect()
    };
    if rerun() != rerun() {
        failures.push("study rerun");
    }

    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("all properties hold ({compared} likelihood comparisons)")
        } else {
            format!("violated: {}", failures.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("t1 reproduction", table_1),
        ("t2 theta trend", table_2),
        ("t3 Hurst trend", table_3),
        ("timing ratio", timing),
        ("moment oracle", moments),
        ("misspecification diagnostic", misspecification),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} {status}: {name}: {detail} [{secs:.1}s]",
            i + 1
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
