//! First-order Markov trajectory optimization.
//!
//! A path is resampled to `T + 1` waypoints and refined by minimizing the sum
//! of squared segment vectors subject to clearance (at every waypoint and at
//! interior points of every segment), joint limits and a terminal equality at
//! the goal. Every term couples at most two consecutive waypoints, so the
//! Gauss-Newton system is block-tridiagonal.

mod banded;
mod solver;

pub use banded::{solve_banded, BandedError, BlockTridiag};
pub use solver::{gn_system, merit, optimize, optimize_with, AlParams, Multipliers, OptResult};

use crate::cspace::{distance, lerp, polyline_length, Configuration, ContractError, Scenario};

pub const DEFAULT_WAYPOINTS: usize = 20;
/// Interior clearance points per segment.
pub const DEFAULT_SEGMENT_CHECKS: usize = 3;

/// Constrained least-squares problem over `x_1..x_T`; `x_0` is pinned.
#[derive(Debug, Clone)]
pub struct TrajectoryProblem<'a> {
    pub scenario: &'a Scenario,
    /// Initial waypoints `x_0..x_T`.
    pub waypoints: Vec<Configuration>,
    pub goal: Configuration,
    pub margin: f64,
    /// Clearance required of `x_T`. The terminal equality pins it to the goal,
    /// so this is the margin clipped to the goal's own clearance.
    pub terminal_margin: f64,
    /// Clearance points strictly inside each segment, equally spaced.
    pub segment_checks: usize,
    /// Further clearance points `(t, s)` on the segment ending at `x_t`,
    /// typically where an earlier solution was found to collide.
    pub extra_checks: Vec<(usize, f64)>,
}

/// Constraint on the configuration `(1 - s) x_{t-1} + s x_t` for `t` in
/// `1..=T`; `s = 1` is the waypoint itself. `grad` is taken with respect to
/// that configuration, so the row for `x_t` is `s * grad` and the row for
/// `x_{t-1}` is `(1 - s) * grad`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConstraint {
    pub waypoint: usize,
    pub s: f64,
    pub value: f64,
    pub grad: Vec<f64>,
}

impl PointConstraint {
    fn at(waypoint: usize, value: f64, grad: Vec<f64>) -> Self {
        PointConstraint {
            waypoint,
            s: 1.0,
            value,
            grad,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// `sum_t f_t^T f_t`.
    pub cost: f64,
    /// Stacked residuals `f_t = x_t - x_{t-1}`, `t = 1..T`.
    pub residuals: Vec<f64>,
    /// Inequalities `g <= 0`.
    pub ineq: Vec<PointConstraint>,
    /// Equalities `h = 0`.
    pub eq: Vec<PointConstraint>,
}

impl TrajectoryProblem<'_> {
    pub fn dim(&self) -> usize {
        self.goal.dim()
    }

    /// Number of free waypoints `T`.
    pub fn horizon(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn start(&self) -> &Configuration {
        &self.waypoints[0]
    }

    /// Stacked decision vector of the initial waypoints.
    pub fn initial_x(&self) -> Vec<f64> {
        self.waypoints[1..].iter().flat_map(|w| w.iter().copied()).collect()
    }

    /// Waypoints `x_0..x_T` for a decision vector.
    pub fn unstack(&self, x: &[f64]) -> Vec<Configuration> {
        let mut out = Vec::with_capacity(self.waypoints.len());
        out.push(self.waypoints[0].clone());
        out.extend(x.chunks(self.dim()).map(|c| Configuration::new(c.to_vec())));
        out
    }

    fn waypoint<'x>(&'x self, x: &'x [f64], t: usize) -> &'x [f64] {
        let n = self.dim();
        if t == 0 {
            &self.waypoints[0]
        } else {
            &x[(t - 1) * n..t * n]
        }
    }

    pub fn with_segment_checks(mut self, count: usize) -> Self {
        self.segment_checks = count;
        self
    }

    pub fn with_extra_checks(mut self, checks: Vec<(usize, f64)>) -> Self {
        self.extra_checks = checks;
        self
    }

    fn required_clearance(&self, t: usize) -> f64 {
        if t == self.horizon() {
            self.terminal_margin
        } else {
            self.margin
        }
    }
}

/// Resamples a polyline to `count` points equally spaced in arc length.
pub fn resample<C: AsRef<[f64]>>(path: &[C], count: usize) -> Vec<Configuration> {
    assert!(count >= 2 && !path.is_empty());
    let first = Configuration::new(path[0].as_ref().to_vec());
    let total = polyline_length(path);
    if total == 0.0 || path.len() == 1 {
        return vec![first; count];
    }
    let mut out = Vec::with_capacity(count);
    out.push(first);
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut seg_len = distance(path[0].as_ref(), path[1].as_ref());
    for k in 1..count - 1 {
        let target = total * k as f64 / (count - 1) as f64;
        while seg + 2 < path.len() && seg_start + seg_len < target {
            seg_start += seg_len;
            seg += 1;
            seg_len = distance(path[seg].as_ref(), path[seg + 1].as_ref());
        }
        let s = if seg_len > 0.0 {
            ((target - seg_start) / seg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(lerp(path[seg].as_ref(), path[seg + 1].as_ref(), s));
    }
    out.push(Configuration::new(path[path.len() - 1].as_ref().to_vec()));
    out
}

/// Builds the problem from a start-to-goal path with `horizon` free waypoints.
pub fn build_problem<'a, C: AsRef<[f64]>>(
    path: &[C],
    scenario: &'a Scenario,
    horizon: usize,
    margin: f64,
) -> Result<TrajectoryProblem<'a>, ContractError> {
    if path.len() < 2 {
        return Err(ContractError::Violation("seed path needs at least 2 configurations".into()));
    }
    if horizon < 2 {
        return Err(ContractError::Violation(format!("need T >= 2 waypoints, got {horizon}")));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(ContractError::ParameterOutOfRange(margin));
    }
    let n = scenario.dim();
    if let Some(bad) = path.iter().find(|p| p.as_ref().len() != n) {
        return Err(ContractError::DimensionMismatch {
            expected: n,
            actual: bad.as_ref().len(),
        });
    }
    let mut waypoints = resample(path, horizon + 1);
    waypoints[0] = scenario.start.clone();
    Ok(from_waypoints(scenario, waypoints, margin))
}

/// Problem seeded with explicit waypoints `x_0..x_T`; `x_0` must be the start.
pub fn from_waypoints(scenario: &Scenario, waypoints: Vec<Configuration>, margin: f64) -> TrajectoryProblem<'_> {
    assert!(waypoints.len() >= 3, "need T >= 2");
    let goal_clearance = if scenario.has_obstacles() {
        scenario.clearance_value(&scenario.goal)
    } else {
        f64::INFINITY
    };
    TrajectoryProblem {
        scenario,
        waypoints,
        goal: scenario.goal.clone(),
        margin,
        terminal_margin: margin.min(goal_clearance.max(0.0)),
        segment_checks: DEFAULT_SEGMENT_CHECKS,
        extra_checks: Vec::new(),
    }
}

fn stacked_residuals(problem: &TrajectoryProblem, x: &[f64]) -> Vec<f64> {
    let mut r = Vec::with_capacity(x.len());
    for t in 1..=problem.horizon() {
        let (prev, cur) = (problem.waypoint(x, t - 1), problem.waypoint(x, t));
        r.extend(cur.iter().zip(prev).map(|(c, p)| c - p));
    }
    r
}

/// Residuals, constraint values and their analytic gradients at `x`.
pub fn evaluate(problem: &TrajectoryProblem, x: &[f64]) -> Evaluation {
    evaluate_with(problem, x, true)
}

/// Like [`evaluate`] but leaves every constraint gradient empty; enough for
/// the merit function, and much cheaper for arms.
pub fn evaluate_values(problem: &TrajectoryProblem, x: &[f64]) -> Evaluation {
    evaluate_with(problem, x, false)
}

fn evaluate_with(problem: &TrajectoryProblem, x: &[f64], gradients: bool) -> Evaluation {
    let n = problem.dim();
    let horizon = problem.horizon();
    assert_eq!(x.len(), horizon * n, "decision vector excludes x_0");
    let residuals = stacked_residuals(problem, x);
    let cost = residuals.iter().map(|r| r * r).sum();
    let bounds = &problem.scenario.bounds;
    let scenario = problem.scenario;
    let checks = problem.segment_checks;
    let mut ineq = Vec::with_capacity(horizon * (2 * n + 1 + checks) + problem.extra_checks.len());
    // One constraint per obstacle and body part keeps each term smooth where
    // the minimum over them would switch between parts.
    let clearance = |q: &[f64]| -> Vec<(f64, Vec<f64>)> {
        if gradients {
            let terms = scenario.clearance_terms(q).expect("waypoint dimension checked above");
            terms.into_iter().map(|(c, g)| (c, g.iter().map(|v| -v).collect())).collect()
        } else {
            scenario.clearance_term_values(q).into_iter().map(|c| (c, Vec::new())).collect()
        }
    };
    let unit = |i: usize, sign: f64| -> Vec<f64> {
        if !gradients {
            return Vec::new();
        }
        let mut e = vec![0.0; n];
        e[i] = sign;
        e
    };
    for t in 1..=horizon {
        let q = problem.waypoint(x, t);
        if scenario.has_obstacles() {
            let prev = problem.waypoint(x, t - 1);
            for j in 1..=checks {
                let s = j as f64 / (checks + 1) as f64;
                for (c, grad) in clearance(&lerp(prev, q, s)) {
                    ineq.push(PointConstraint {
                        waypoint: t,
                        s,
                        value: problem.margin - c,
                        grad,
                    });
                }
            }
            for (c, grad) in clearance(q) {
                ineq.push(PointConstraint::at(t, problem.required_clearance(t) - c, grad));
            }
        }
        for i in 0..n {
            ineq.push(PointConstraint::at(t, q[i] - bounds.hi(i), unit(i, 1.0)));
            ineq.push(PointConstraint::at(t, bounds.lo(i) - q[i], unit(i, -1.0)));
        }
    }
    if scenario.has_obstacles() {
        for &(t, s) in &problem.extra_checks {
            let q = lerp(problem.waypoint(x, t - 1), problem.waypoint(x, t), s);
            for (c, grad) in clearance(&q) {
                ineq.push(PointConstraint {
                    waypoint: t,
                    s,
                    value: problem.margin - c,
                    grad,
                });
            }
        }
    }
    let last = problem.waypoint(x, horizon);
    let eq = (0..n)
        .map(|i| PointConstraint::at(horizon, last[i] - problem.goal[i], unit(i, 1.0)))
        .collect();
    Evaluation {
        cost,
        residuals,
        ineq,
        eq,
    }
}

/// Dense Jacobian (row-major, `rows x T*n`) of the stacked residuals.
pub fn residual_jacobian(problem: &TrajectoryProblem) -> Vec<Vec<f64>> {
    let n = problem.dim();
    let cols = problem.horizon() * n;
    let mut rows = Vec::with_capacity(cols);
    for t in 1..=problem.horizon() {
        for i in 0..n {
            let mut row = vec![0.0; cols];
            row[(t - 1) * n + i] = 1.0;
            if t >= 2 {
                row[(t - 2) * n + i] = -1.0;
            }
            rows.push(row);
        }
    }
    rows
}

/// Dense row of a constraint's gradient with respect to `x_1..x_T`.
pub fn dense_row(c: &PointConstraint, problem: &TrajectoryProblem) -> Vec<f64> {
    let n = problem.dim();
    let mut row = vec![0.0; problem.horizon() * n];
    let t = c.waypoint;
    for (i, g) in c.grad.iter().enumerate() {
        row[(t - 1) * n + i] = c.s * g;
        if t >= 2 {
            row[(t - 2) * n + i] = (1.0 - c.s) * g;
        }
    }
    row
}

/// Largest constraint violation at `x`.
pub fn max_violation(eval: &Evaluation) -> f64 {
    let g = eval.ineq.iter().map(|c| c.value.max(0.0)).fold(0.0, f64::max);
    let h = eval.eq.iter().map(|c| c.value.abs()).fold(0.0, f64::max);
    g.max(h)
}

/// Path length `sum_t |x_t - x_{t-1}|`, the planner's metric.
pub fn path_cost<C: AsRef<[f64]>>(waypoints: &[C]) -> f64 {
    polyline_length(waypoints)
}

/// Sum of squared segment lengths, the optimizer's objective.
pub fn squared_cost<C: AsRef<[f64]>>(waypoints: &[C]) -> f64 {
    waypoints
        .windows(2)
        .map(|w| distance(w[0].as_ref(), w[1].as_ref()).powi(2))
        .sum()
}
