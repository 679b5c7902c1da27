//! Two-parameter Nelder-Mead engine over `(H, theta)`.
//!
//! The simplex either lives directly in `(H, theta)` space with Box-style
//! clamping of infeasible trial points, or in an unconstrained `(x, y)`
//! space mapped onto the feasible set by
//! `H = 1/2 + arctan(x) / pi`, `theta = exp(y)`.
//!
//! Iteration stops once
//! `sum_{i=2,3} |1 - H_i / H_1| + |1 - theta_i / theta_1| <= tolerance`,
//! where vertex 1 is the current best, or when the iteration cap is hit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan, exp, log, tan};

use crate::error::{check_open_unit, check_positive, Error, Result};

/// Lower bound used when clamping (Box mode) and as a floor in the stopping
/// rule's denominators.
pub const BOX_EPSILON: f64 = 1e-4;
/// Upper clamp for `theta` in Box mode.
pub const BOX_THETA_MAX: f64 = 1e4;

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;
// keeps the stopping rule finite when a coordinate underflows to zero
const RATIO_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPoint {
    pub hurst: f64,
    pub theta: f64,
}

impl ParamPoint {
    pub const fn new(hurst: f64, theta: f64) -> Self {
        Self { hurst, theta }
    }
}

/// Initial simplex `{(0.45, 25), (0.55, 28), (0.50, 35)}`.
pub const DEFAULT_INIT: [ParamPoint; 3] = [
    ParamPoint::new(0.45, 25.0),
    ParamPoint::new(0.55, 28.0),
    ParamPoint::new(0.50, 35.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintMode {
    /// Optimize `(x, y)` with `H = 1/2 + arctan(x)/pi`, `theta = exp(y)`.
    #[default]
    Transform,
    /// Optimize `(H, theta)` directly, clamping with [`constrain_box`].
    Box,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub init: [ParamPoint; 3],
    pub constraints: ConstraintMode,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Extra starting simplices. When non-empty, the optimizer is run from
    /// `init` and from each of these, then once more from the simplex made
    /// of the best three solutions.
    pub extra_starts: Vec<[ParamPoint; 3]>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            init: DEFAULT_INIT,
            constraints: ConstraintMode::Transform,
            max_iterations: 500,
            tolerance: 1e-3,
            extra_starts: Vec::new(),
        }
    }
}

impl SimplexOptions {
    /// Three-start variant: the default simplex plus two shifted copies.
    pub fn with_multi_start(mut self) -> Self {
        self.extra_starts = alloc::vec![
            [
                ParamPoint::new(0.25, 5.0),
                ParamPoint::new(0.35, 6.0),
                ParamPoint::new(0.30, 8.0),
            ],
            [
                ParamPoint::new(0.70, 80.0),
                ParamPoint::new(0.80, 90.0),
                ParamPoint::new(0.75, 110.0),
            ],
        ];
        self
    }
}

/// Vertices and values of the current simplex, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState {
    pub vertices: [ParamPoint; 3],
    /// Objective values in the caller's direction.
    pub values: [f64; 3],
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub best: ParamPoint,
    /// Objective value at `best`, in the caller's direction.
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each iteration, in the caller's direction.
    pub history: Vec<f64>,
    pub final_state: SimplexState,
}

/// Clamps `H` into `[eps, 1 - eps]` and `theta` into `[eps, theta_max]`.
pub fn constrain_box(p: ParamPoint) -> ParamPoint {
    let clamp = |v: f64, lo: f64, hi: f64| if v.is_nan() { lo } else { v.clamp(lo, hi) };
    ParamPoint {
        hurst: clamp(p.hurst, BOX_EPSILON, 1.0 - BOX_EPSILON),
        theta: clamp(p.theta, BOX_EPSILON, BOX_THETA_MAX),
    }
}

/// `(x, y) -> (1/2 + arctan(x)/pi, exp(y))`.
pub fn transform_params(x: f64, y: f64) -> ParamPoint {
    ParamPoint {
        hurst: 0.5 + atan(x) / PI,
        theta: exp(y),
    }
}

/// Inverse of [`transform_params`].
pub fn inverse_transform_params(p: ParamPoint) -> Result<(f64, f64)> {
    check_open_unit("H", p.hurst)?;
    check_positive("theta", p.theta)?;
    Ok((tan(PI * (p.hurst - 0.5)), log(p.theta)))
}

type Coord = [f64; 2];

struct Engine<F> {
    objective: F,
    sign: f64,
    mode: ConstraintMode,
    evaluations: usize,
}

impl<F: FnMut(ParamPoint) -> f64> Engine<F> {
    fn to_params(&self, u: Coord) -> ParamPoint {
        match self.mode {
            ConstraintMode::Transform => transform_params(u[0], u[1]),
            ConstraintMode::Box => ParamPoint::new(u[0], u[1]),
        }
    }

    fn admissible(&self, u: Coord) -> Coord {
        match self.mode {
            ConstraintMode::Transform => u,
            ConstraintMode::Box => {
                let p = constrain_box(ParamPoint::new(u[0], u[1]));
                [p.hurst, p.theta]
            }
        }
    }

    // value to minimize; NaN is treated as the worst possible value
    fn eval(&mut self, u: Coord) -> f64 {
        self.evaluations += 1;
        let p = self.to_params(u);
        let v = self.sign * (self.objective)(p);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn lerp(a: Coord, b: Coord, t: f64) -> Coord {
    // a + t (b - a)
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn spread(points: &[ParamPoint; 3]) -> f64 {
    let best = points[0];
    let h0 = best.hurst.abs().max(RATIO_FLOOR);
    let t0 = best.theta.abs().max(RATIO_FLOOR);
    points[1..]
        .iter()
        .map(|p| (1.0 - p.hurst / h0).abs() + (1.0 - p.theta / t0).abs())
        .sum()
}

fn run_single<F: FnMut(ParamPoint) -> f64>(
    engine: &mut Engine<F>,
    init: &[ParamPoint; 3],
    max_iterations: usize,
    tolerance: f64,
) -> Result<SimplexOutcome> {
    let mut simplex: [(Coord, f64); 3] = [([0.0; 2], 0.0); 3];
    for (slot, p) in simplex.iter_mut().zip(init) {
        let u = match engine.mode {
            ConstraintMode::Transform => {
                let (x, y) = inverse_transform_params(*p)?;
                [x, y]
            }
            ConstraintMode::Box => {
                let c = constrain_box(*p);
                [c.hurst, c.theta]
            }
        };
        *slot = (u, engine.eval(u));
    }
    if simplex.iter().all(|(_, v)| !v.is_finite()) {
        return Err(Error::SimplexInit);
    }

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        // stable sort: on ties the lower index keeps precedence
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let params = simplex.map(|(u, _)| engine.to_params(u));
        if spread(&params) <= tolerance {
            converged = true;
            break;
        }
        if iterations >= max_iterations {
            break;
        }
        iterations += 1;

        let (best, second, worst) = (simplex[0], simplex[1], simplex[2]);
        let centroid = lerp(best.0, second.0, 0.5);
        let reflected = engine.admissible(lerp(centroid, worst.0, -REFLECTION));
        let f_r = engine.eval(reflected);

        if f_r < best.1 {
            let expanded = engine.admissible(lerp(centroid, worst.0, -EXPANSION));
            let f_e = engine.eval(expanded);
            simplex[2] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < second.1 {
            simplex[2] = (reflected, f_r);
        } else {
            let outside = f_r < worst.1;
            let contracted = if outside {
                engine.admissible(lerp(centroid, reflected, CONTRACTION))
            } else {
                engine.admissible(lerp(centroid, worst.0, CONTRACTION))
            };
            let f_c = engine.eval(contracted);
            let accept = if outside { f_c <= f_r } else { f_c < worst.1 };
            if accept {
                simplex[2] = (contracted, f_c);
            } else {
                for v in simplex.iter_mut().skip(1) {
                    let u = engine.admissible(lerp(best.0, v.0, SHRINK));
                    *v = (u, engine.eval(u));
                }
            }
        }
        let current_best = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        history.push(engine.sign * current_best);
    }

    let vertices = simplex.map(|(u, _)| engine.to_params(u));
    let values = simplex.map(|(_, v)| engine.sign * v);
    Ok(SimplexOutcome {
        best: vertices[0],
        value: values[0],
        iterations,
        evaluations: 0,
        converged,
        history,
        final_state: SimplexState {
            vertices,
            values,
            iteration: iterations,
        },
    })
}

/// Optimizes `objective(H, theta)`.
///
/// Non-finite or NaN objective values are treated as the worst possible
/// value, so objectives may signal failures with `+inf` (minimize) or
/// `-inf` (maximize).
pub fn nelder_mead<F: FnMut(ParamPoint) -> f64>(
    objective: F,
    direction: Direction,
    options: &SimplexOptions,
) -> Result<SimplexOutcome> {
    let mut engine = Engine {
        objective,
        sign: match direction {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        },
        mode: options.constraints,
        evaluations: 0,
    };
    let mut outcome = run_single(
        &mut engine,
        &options.init,
        options.max_iterations,
        options.tolerance,
    )?;
    if !options.extra_starts.is_empty() {
        let mut runs = alloc::vec![outcome];
        for start in &options.extra_starts {
            // a start whose vertices are all infeasible is skipped
            if let Ok(o) = run_single(
                &mut engine,
                start,
                options.max_iterations,
                options.tolerance,
            ) {
                runs.push(o);
            }
        }
        let sign = engine.sign;
        runs.sort_by(|a, b| (sign * a.value).total_cmp(&(sign * b.value)));
        let mut iterations: usize = runs.iter().map(|r| r.iterations).sum();
        let mut chosen = runs.swap_remove(0);
        if runs.len() >= 2 {
            let polish_init = [chosen.best, runs[0].best, runs[1].best];
            if let Ok(polish) = run_single(
                &mut engine,
                &polish_init,
                options.max_iterations,
                options.tolerance,
            ) {
                iterations += polish.iterations;
                if sign * polish.value <= sign * chosen.value {
                    chosen = polish;
                }
            }
        }
        chosen.iterations = iterations;
        outcome = chosen;
    }
    outcome.evaluations = engine.evaluations;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(p: ParamPoint) -> f64 {
        (p.hurst - 0.5).powi(2) + (p.theta - 30.0).powi(2)
    }

    #[test]
    fn box_clamping() {
        assert_eq!(
            constrain_box(ParamPoint::new(0.5, 30.0)),
            ParamPoint::new(0.5, 30.0)
        );
        assert_eq!(
            constrain_box(ParamPoint::new(1.2, 30.0)),
            ParamPoint::new(1.0 - 1e-4, 30.0)
        );
        assert_eq!(
            constrain_box(ParamPoint::new(-3.0, -5.0)),
            ParamPoint::new(1e-4, 1e-4)
        );
        assert_eq!(
            constrain_box(ParamPoint::new(0.5, 1e9)).theta,
            BOX_THETA_MAX
        );
    }

    #[test]
    fn transform_origin_and_limits() {
        assert_eq!(transform_params(0.0, 0.0), ParamPoint::new(0.5, 1.0));
        let mut last = 0.5;
        for x in [1.0, 10.0, 100.0, 1e4, 1e6] {
            let h = transform_params(x, 0.0).hurst;
            assert!(h > last && h < 1.0);
            last = h;
        }
        assert!(1.0 - last < 1e-6);
        assert!(inverse_transform_params(ParamPoint::new(1.0, 1.0)).is_err());
        assert!(inverse_transform_params(ParamPoint::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn minimizes_quadratic_in_both_modes() {
        for mode in [ConstraintMode::Transform, ConstraintMode::Box] {
            let opts = SimplexOptions {
                constraints: mode,
                tolerance: 1e-8,
                ..Default::default()
            };
            let out = nelder_mead(quadratic, Direction::Minimize, &opts).unwrap();
            assert!(out.converged, "{mode:?}");
            assert!(
                (out.best.hurst - 0.5).abs() < 1e-3,
                "{mode:?} {:?}",
                out.best
            );
            assert!(
                (out.best.theta - 30.0).abs() < 1e-3,
                "{mode:?} {:?}",
                out.best
            );
        }
    }

    #[test]
    fn default_tolerance_stops_near_optimum() {
        let out = nelder_mead(quadratic, Direction::Minimize, &SimplexOptions::default()).unwrap();
        assert!(out.converged);
        assert!(out.iterations < 500);
        assert!((out.best.hurst - 0.5).abs() < 1e-2 && (out.best.theta - 30.0).abs() < 0.1);
    }

    #[test]
    fn maximize_mirrors_minimize() {
        let opts = SimplexOptions::default();
        let a = nelder_mead(quadratic, Direction::Minimize, &opts).unwrap();
        let b = nelder_mead(|p| -quadratic(p), Direction::Maximize, &opts).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.value, -b.value);
    }

    #[test]
    fn history_is_monotone() {
        let opts = SimplexOptions::default();
        let out = nelder_mead(
            |p| (p.hurst - 0.3).powi(2) * 50.0 + (libm::log(p.theta) - 2.0).powi(2),
            Direction::Minimize,
            &opts,
        )
        .unwrap();
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn all_infinite_start_is_an_error() {
        let r = nelder_mead(
            |_| f64::INFINITY,
            Direction::Minimize,
            &SimplexOptions::default(),
        );
        assert_eq!(r.unwrap_err(), Error::SimplexInit);
        let r = nelder_mead(
            |_| f64::NAN,
            Direction::Maximize,
            &SimplexOptions::default(),
        );
        assert_eq!(r.unwrap_err(), Error::SimplexInit);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let opts = SimplexOptions {
            max_iterations: 3,
            ..Default::default()
        };
        let out = nelder_mead(quadratic, Direction::Minimize, &opts).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn multi_start_finds_quadratic_optimum() {
        let opts = SimplexOptions::default().with_multi_start();
        let out = nelder_mead(quadratic, Direction::Minimize, &opts).unwrap();
        assert!((out.best.hurst - 0.5).abs() < 1e-2 && (out.best.theta - 30.0).abs() < 0.1);
    }
}
