//! Augmented Lagrangian outer loop around damped Gauss-Newton.

use super::banded::{solve_banded, BlockTridiag};
use super::{evaluate, evaluate_values, max_violation, path_cost, Evaluation, TrajectoryProblem};
use crate::cspace::{Configuration, ContractError};

const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP_SCALE: f64 = 1e-4;
const MAX_DAMPING: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlParams {
    pub mu0: f64,
    pub mu_growth: f64,
    pub outer_max: usize,
    pub inner_max: usize,
    pub tol_constraint: f64,
    pub tol_step: f64,
    pub lm_damping: f64,
}

impl Default for AlParams {
    fn default() -> Self {
        AlParams {
            mu0: 1.0,
            mu_growth: 2.0,
            outer_max: 20,
            inner_max: 50,
            tol_constraint: 1e-4,
            tol_step: 1e-6,
            lm_damping: 1e-4,
        }
    }
}

impl AlParams {
    pub fn validate(&self) -> Result<(), ContractError> {
        let positive = [self.mu0, self.tol_constraint, self.tol_step];
        if let Some(&bad) = positive.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(ContractError::ParameterOutOfRange(bad));
        }
        if !(self.mu_growth > 1.0 && self.mu_growth.is_finite()) {
            return Err(ContractError::ParameterOutOfRange(self.mu_growth));
        }
        if !(self.lm_damping >= 0.0 && self.lm_damping.is_finite()) {
            return Err(ContractError::ParameterOutOfRange(self.lm_damping));
        }
        if self.outer_max == 0 || self.inner_max == 0 {
            return Err(ContractError::Violation("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Lagrange multipliers and penalty weight of the augmented Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    /// One per equality.
    pub lambda: Vec<f64>,
    /// One per inequality, always `>= 0`.
    pub kappa: Vec<f64>,
    pub mu: f64,
}

impl Multipliers {
    pub fn new(eval: &Evaluation, mu: f64) -> Self {
        Multipliers {
            lambda: vec![0.0; eval.eq.len()],
            kappa: vec![0.0; eval.ineq.len()],
            mu,
        }
    }

    fn update(&mut self, eval: &Evaluation, growth: f64) {
        let two_mu = 2.0 * self.mu;
        for (l, h) in self.lambda.iter_mut().zip(&eval.eq) {
            *l += two_mu * h.value;
        }
        for (k, g) in self.kappa.iter_mut().zip(&eval.ineq) {
            *k = (*k + two_mu * g.value).max(0.0);
        }
        self.mu *= growth;
    }
}

fn active(g: f64, kappa: f64) -> bool {
    g >= 0.0 || kappa > 0.0
}

/// Augmented Lagrangian value at an evaluated point.
pub fn merit(eval: &Evaluation, mult: &Multipliers) -> f64 {
    let mu = mult.mu;
    let eq: f64 = eval
        .eq
        .iter()
        .zip(&mult.lambda)
        .map(|(h, l)| l * h.value + mu * h.value * h.value)
        .sum();
    let ineq: f64 = eval
        .ineq
        .iter()
        .zip(&mult.kappa)
        .filter(|(g, &k)| active(g.value, k))
        .map(|(g, k)| k * g.value + mu * g.value * g.value)
        .sum();
    eval.cost + eq + ineq
}

/// Gauss-Newton Hessian of the augmented Lagrangian and the negative
/// gradient, without damping.
pub fn gn_system(problem: &TrajectoryProblem, eval: &Evaluation, mult: &Multipliers) -> (BlockTridiag, Vec<f64>) {
    let n = problem.dim();
    let horizon = problem.horizon();
    let mut h = BlockTridiag::zeros(horizon, n);
    let mut grad = vec![0.0; horizon * n];
    // sum_t |x_t - x_{t-1}|^2: x_t appears in f_t with +I and in f_{t+1} with -I.
    for k in 0..horizon {
        let d = if k + 1 < horizon { 4.0 } else { 2.0 };
        let block = h.diag_mut(k);
        for i in 0..n {
            block[i * n + i] = d;
        }
        if k + 1 < horizon {
            let off = h.lower_mut(k);
            for i in 0..n {
                off[i * n + i] = -2.0;
            }
        }
        for i in 0..n {
            let f_t = eval.residuals[k * n + i];
            let f_next = if k + 1 < horizon { eval.residuals[(k + 1) * n + i] } else { 0.0 };
            grad[k * n + i] = 2.0 * (f_t - f_next);
        }
    }
    let mu = mult.mu;
    let mut add = |c: &super::PointConstraint, weight: f64| {
        let k = c.waypoint - 1;
        let (s, r) = (c.s, 1.0 - c.s);
        for (i, gi) in c.grad.iter().enumerate() {
            grad[k * n + i] += weight * s * gi;
        }
        h.add_outer(k, &c.grad, 2.0 * mu * (s * s));
        // x_0 is pinned; only later waypoints carry the (1 - s) share.
        if k >= 1 && r != 0.0 {
            for (i, gi) in c.grad.iter().enumerate() {
                grad[(k - 1) * n + i] += weight * r * gi;
            }
            h.add_outer(k - 1, &c.grad, 2.0 * mu * (r * r));
            h.add_outer_lower(k - 1, &c.grad, 2.0 * mu * (s * r));
        }
    };
    for (c, l) in eval.eq.iter().zip(&mult.lambda) {
        add(c, l + 2.0 * mu * c.value);
    }
    for (c, &k) in eval.ineq.iter().zip(&mult.kappa) {
        if active(c.value, k) {
            add(c, k + 2.0 * mu * c.value);
        }
    }
    for g in &mut grad {
        *g = -*g;
    }
    (h, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    /// Optimized `x_0..x_T`; `x_0` is the problem's start, unchanged.
    pub waypoints: Vec<Configuration>,
    pub feasible: bool,
    /// Path length of `waypoints`.
    pub reported_cost: f64,
    pub max_violation: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Maximum violation at the end of each outer iteration.
    pub violation_history: Vec<f64>,
}

pub fn optimize(problem: &TrajectoryProblem, params: &AlParams) -> OptResult {
    optimize_with(problem, params, &mut || false)
}

/// As [`optimize`], polling `should_stop` between outer iterations.
pub fn optimize_with(
    problem: &TrajectoryProblem,
    params: &AlParams,
    should_stop: &mut dyn FnMut() -> bool,
) -> OptResult {
    let mut x = problem.initial_x();
    let mut eval = evaluate(problem, &x);
    let mut mult = Multipliers::new(&eval, params.mu0);
    let mut damping = params.lm_damping;
    let mut outer_iterations = 0;
    let mut inner_iterations = 0;
    let mut history = Vec::new();

    for outer in 0..params.outer_max {
        if outer > 0 && should_stop() {
            break;
        }
        outer_iterations += 1;
        let x_outer = x.clone();
        for _ in 0..params.inner_max {
            let phi0 = merit(&eval, &mult);
            let (hess, rhs) = gn_system(problem, &eval, &mult);
            let Some((dx, used)) = damped_solve(&hess, &rhs, damping) else {
                break;
            };
            damping = used;
            // rhs is the negative gradient.
            let slope: f64 = -rhs.iter().zip(&dx).map(|(g, d)| g * d).sum::<f64>();
            if slope >= 0.0 {
                break;
            }
            inner_iterations += 1;
            let mut alpha = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + alpha * di).collect();
                if merit(&evaluate_values(problem, &trial), &mult) <= phi0 + ARMIJO_SLOPE * alpha * slope {
                    let e = evaluate(problem, &trial);
                    break Some((trial, e));
                }
                alpha *= BACKTRACK;
                if alpha < MIN_STEP_SCALE {
                    break None;
                }
            };
            let Some((trial, e)) = accepted else {
                damping = (damping.max(1e-8) * 10.0).min(MAX_DAMPING);
                continue;
            };
            let step = alpha * norm(&dx);
            x = trial;
            eval = e;
            damping = (damping * 0.5).max(params.lm_damping);
            if step <= params.tol_step {
                break;
            }
        }
        let violation = max_violation(&eval);
        history.push(violation);
        let moved = norm(&x.iter().zip(&x_outer).map(|(a, b)| a - b).collect::<Vec<_>>());
        if violation <= params.tol_constraint && moved <= params.tol_step {
            break;
        }
        mult.update(&eval, params.mu_growth);
    }

    let waypoints = problem.unstack(&x);
    let violation = max_violation(&eval);
    OptResult {
        reported_cost: path_cost(&waypoints),
        waypoints,
        feasible: violation <= params.tol_constraint,
        max_violation: violation,
        outer_iterations,
        inner_iterations,
        violation_history: history,
    }
}

/// Solves `(H + damping I) d = rhs`, raising the damping until the factor
/// succeeds. Returns the step and the damping used.
fn damped_solve(h: &BlockTridiag, rhs: &[f64], damping: f64) -> Option<(Vec<f64>, f64)> {
    let mut damping = damping;
    loop {
        let mut m = h.clone();
        m.add_diagonal(damping);
        match solve_banded(&m, rhs) {
            Ok(d) => return Some((d, damping)),
            Err(_) if damping < MAX_DAMPING => damping = (damping.max(1e-8) * 10.0).min(MAX_DAMPING),
            Err(_) => return None,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
