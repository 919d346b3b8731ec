//! The anytime planning loop: batch informed tree search whose edges are
//! checked level by level, with partially colliding edges admitted at a cost
//! surcharge, and trajectory optimization of every improved tree path.

use crate::bitstar::{init_state, CostLedger};
use crate::cspace::{lerp, Configuration, ContractError, RobotModel, Scenario};
use crate::komo::{self, AlParams, DEFAULT_SEGMENT_CHECKS, DEFAULT_WAYPOINTS};
use crate::relaxed_check::{check_edge_full, check_edge_relaxed, num_interior_points};
use crate::sampling::{
    connection_radius, InformedSet, Sampler, SamplerConfig, DEFAULT_BATCH_SIZE, DEFAULT_RADIUS_ETA,
    DEFAULT_REJECTION_CAP,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::time::{Duration, Instant};

/// Default edge-check resolution as a fraction of the bounds diagonal.
pub const DEFAULT_RESOLUTION_FRACTION: f64 = 0.01;
/// Reported paths are validated at this many times the edge resolution.
pub const VALIDATION_REFINEMENT: f64 = 10.0;
/// Relative seed noise of the restart baseline, per dimension range.
pub const RESTART_NOISE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlannerMode {
    Bitkomo,
    Bitstar,
    KomoRestarts,
}

impl PlannerMode {
    pub fn name(self) -> &'static str {
        match self {
            PlannerMode::Bitkomo => "bitkomo",
            PlannerMode::Bitstar => "bitstar",
            PlannerMode::KomoRestarts => "komo",
        }
    }
}

impl fmt::Display for PlannerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bitkomo" => Ok(PlannerMode::Bitkomo),
            "bitstar" => Ok(PlannerMode::Bitstar),
            "komo" | "komo_restarts" => Ok(PlannerMode::KomoRestarts),
            other => Err(format!("unknown planner mode `{other}` (expected bitkomo, bitstar or komo)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerParams {
    pub mode: PlannerMode,
    /// Largest collision penalty still admitted into the tree.
    pub delta: u32,
    pub batch_size: usize,
    /// Maximum spacing of checked states along an edge.
    pub resolution: f64,
    /// Free waypoints `T` of the optimizer.
    pub waypoints: usize,
    /// Clearance demanded of optimized waypoints.
    pub margin: f64,
    /// Extra clearance points inside each optimizer segment.
    pub segment_checks: usize,
    pub al: AlParams,
    /// Connection radius scale.
    pub eta: f64,
    pub rejection_cap: usize,
}

impl PlannerParams {
    /// Defaults scaled to the scenario: resolution at 1% of the bounds
    /// diagonal and a clearance margin of half of that. The margin is a
    /// workspace distance, so for an arm (whose bounds are joint angles) it
    /// is taken as half of 1% of the arm's reach diameter instead.
    pub fn for_scenario(scenario: &Scenario, mode: PlannerMode) -> Self {
        let resolution = DEFAULT_RESOLUTION_FRACTION * scenario.bounds.diagonal();
        let margin = match &scenario.robot {
            RobotModel::Disc { .. } => 0.5 * resolution,
            RobotModel::PlanarArm { link_lengths, .. } => {
                0.5 * DEFAULT_RESOLUTION_FRACTION * 2.0 * link_lengths.iter().sum::<f64>()
            }
        };
        PlannerParams {
            mode,
            delta: match mode {
                PlannerMode::Bitkomo => 1,
                _ => 0,
            },
            batch_size: DEFAULT_BATCH_SIZE,
            resolution,
            waypoints: DEFAULT_WAYPOINTS,
            segment_checks: DEFAULT_SEGMENT_CHECKS,
            margin,
            al: AlParams::default(),
            eta: DEFAULT_RADIUS_ETA,
            rejection_cap: DEFAULT_REJECTION_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), ContractError> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(ContractError::ParameterOutOfRange(self.resolution));
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return Err(ContractError::ParameterOutOfRange(self.margin));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(ContractError::ParameterOutOfRange(self.eta));
        }
        if self.batch_size == 0 || self.rejection_cap == 0 {
            return Err(ContractError::Violation("batch size and rejection cap must be positive".into()));
        }
        if self.waypoints < 2 {
            return Err(ContractError::Violation(format!("need T >= 2 waypoints, got {}", self.waypoints)));
        }
        self.al.validate()
    }
}

/// When to stop: wall-clock budget, optionally a cost that is good enough,
/// optionally an iteration cap that makes runs independent of timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationCondition {
    pub budget: Duration,
    pub target_cost: Option<f64>,
    pub max_iterations: Option<u64>,
}

impl TerminationCondition {
    pub fn budget(seconds: f64) -> Self {
        TerminationCondition {
            budget: Duration::from_secs_f64(seconds),
            target_cost: None,
            max_iterations: None,
        }
    }

    pub fn with_target(mut self, cost: f64) -> Self {
        self.target_cost = Some(cost);
        self
    }

    pub fn with_max_iterations(mut self, n: u64) -> Self {
        self.max_iterations = Some(n);
        self
    }

    pub fn validate(&self) -> Result<(), ContractError> {
        if self.budget.is_zero() {
            return Err(ContractError::Violation("time budget must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    FirstSolution,
    Improvement,
    OptimizerSuccess,
    OptimizerFailure,
    BatchAdded,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::FirstSolution => "first_solution",
            EventKind::Improvement => "improvement",
            EventKind::OptimizerSuccess => "optimizer_success",
            EventKind::OptimizerFailure => "optimizer_failure",
            EventKind::BatchAdded => "batch_added",
        }
    }

    /// Whether the event records a new best cost.
    pub fn is_solution(self) -> bool {
        matches!(self, EventKind::FirstSolution | EventKind::Improvement)
    }

    pub fn is_optimizer(self) -> bool {
        matches!(self, EventKind::OptimizerSuccess | EventKind::OptimizerFailure)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            EventKind::FirstSolution,
            EventKind::Improvement,
            EventKind::OptimizerSuccess,
            EventKind::OptimizerFailure,
            EventKind::BatchAdded,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown event `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEvent {
    /// Seconds since the start of planning.
    pub elapsed: f64,
    pub kind: EventKind,
    pub cost: Option<f64>,
}

/// A path that became the best solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub elapsed: f64,
    pub cost: f64,
    pub path: Vec<Configuration>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlanStats {
    pub iterations: u64,
    pub batches: u64,
    pub edges_checked: u64,
    pub penalized_edges: u64,
    pub optimizer_calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub best_path: Option<Vec<Configuration>>,
    pub c_best: f64,
    pub events: Vec<PlanEvent>,
    /// Every path that improved `c_best`, in order.
    pub solutions: Vec<Solution>,
    pub rng_seed: u64,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.best_path.is_some()
    }

    /// Best cost at or before `t` seconds.
    pub fn cost_at(&self, t: f64) -> Option<f64> {
        self.events
            .iter()
            .filter(|e| e.kind.is_solution() && e.elapsed <= t)
            .filter_map(|e| e.cost)
            .last()
    }
}

/// Refines a start-to-goal path. Returning `None` reports an infeasible
/// outcome; implementations must not have any other effect on the run.
pub trait PathOptimizer {
    fn optimize(
        &mut self,
        scenario: &Scenario,
        path: &[Configuration],
        should_stop: &mut dyn FnMut() -> bool,
    ) -> Option<Vec<Configuration>>;
}

/// Arc-length resampling followed by augmented Lagrangian Gauss-Newton.
#[derive(Debug, Clone, PartialEq)]
pub struct KomoOptimizer {
    pub waypoints: usize,
    pub margin: f64,
    pub segment_checks: usize,
    pub al: AlParams,
    /// Resolution at which a converged path is checked for collisions that
    /// fall between its constraint points; `None` skips the check.
    pub repair_resolution: Option<f64>,
    /// Re-solves allowed after such collisions are found.
    pub repair_rounds: usize,
}

/// Re-solves after a converged path is found colliding at the fine check.
pub const DEFAULT_REPAIR_ROUNDS: usize = 3;

impl KomoOptimizer {
    pub fn from_params(params: &PlannerParams) -> Self {
        KomoOptimizer {
            waypoints: params.waypoints,
            margin: params.margin,
            segment_checks: params.segment_checks,
            al: params.al,
            repair_resolution: Some(params.resolution / VALIDATION_REFINEMENT),
            repair_rounds: DEFAULT_REPAIR_ROUNDS,
        }
    }
}

/// Interior samples of each segment at `resolution` that collide, reduced to
/// the least clear sample of every colliding run, as `(t, s)` on the segment
/// ending at `path[t]`.
pub fn collision_points(path: &[Configuration], scenario: &Scenario, resolution: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (i, w) in path.windows(2).enumerate() {
        let n_d = num_interior_points(&w[0], &w[1], resolution);
        let scale = (n_d + 1) as f64;
        let mut worst: Option<(f64, f64)> = None;
        for j in 1..=n_d + 1 {
            let s = j as f64 / scale;
            let q = (j <= n_d).then(|| lerp(&w[0], &w[1], s));
            if let Some(q) = q.filter(|q| !scenario.is_valid(q)) {
                let c = scenario.clearance_value(&q);
                if worst.is_none_or(|(best, _)| c < best) {
                    worst = Some((c, s));
                }
            } else if let Some((_, s_worst)) = worst.take() {
                out.push((i + 1, s_worst));
            }
        }
    }
    out
}

/// Solves `problem`, then while the converged path collides between its
/// constraint points at `resolution`, adds clearance constraints there and
/// re-solves from the converged waypoints.
fn optimize_with_repair(
    mut problem: komo::TrajectoryProblem<'_>,
    al: &AlParams,
    resolution: Option<f64>,
    rounds: usize,
    should_stop: &mut dyn FnMut() -> bool,
) -> komo::OptResult {
    let mut result = komo::optimize_with(&problem, al, &mut *should_stop);
    let Some(resolution) = resolution else {
        return result;
    };
    for _ in 0..rounds {
        if !result.feasible || should_stop() {
            break;
        }
        let mut path = result.waypoints.clone();
        *path.last_mut().expect("at least three waypoints") = problem.goal.clone();
        let found = collision_points(&path, problem.scenario, resolution);
        if found.is_empty() {
            break;
        }
        problem.extra_checks.extend(found);
        problem.waypoints = result.waypoints;
        problem.waypoints[0] = problem.scenario.start.clone();
        result = komo::optimize_with(&problem, al, &mut *should_stop);
    }
    result
}

impl PathOptimizer for KomoOptimizer {
    fn optimize(
        &mut self,
        scenario: &Scenario,
        path: &[Configuration],
        should_stop: &mut dyn FnMut() -> bool,
    ) -> Option<Vec<Configuration>> {
        let problem = komo::build_problem(path, scenario, self.waypoints, self.margin)
            .ok()?
            .with_segment_checks(self.segment_checks);
        let result = optimize_with_repair(problem, &self.al, self.repair_resolution, self.repair_rounds, should_stop);
        result.feasible.then_some(result.waypoints)
    }
}

/// Optimizer that always reports failure, for ablations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FailingOptimizer;

impl PathOptimizer for FailingOptimizer {
    fn optimize(&mut self, _: &Scenario, _: &[Configuration], _: &mut dyn FnMut() -> bool) -> Option<Vec<Configuration>> {
        None
    }
}

/// `c_hat + cp * c_max`.
pub fn penalized_edge_cost(c_hat: f64, cp: u32, c_max: f64) -> f64 {
    if cp == 0 {
        c_hat
    } else {
        c_hat + cp as f64 * c_max
    }
}

/// Every waypoint valid and every segment clear at `resolution`.
pub fn validate_path(path: &[Configuration], scenario: &Scenario, resolution: f64) -> bool {
    !path.is_empty()
        && path.iter().all(|q| q.dim() == scenario.dim() && scenario.is_valid(q))
        && path.windows(2).all(|w| check_edge_full(scenario, &w[0], &w[1], resolution))
}

/// Runs the planner with the optimizer implied by `params.mode`.
pub fn plan(
    scenario: &Scenario,
    params: &PlannerParams,
    ptc: &TerminationCondition,
    seed: u64,
) -> Result<PlanResult, ContractError> {
    let mut optimizer = KomoOptimizer::from_params(params);
    plan_with_optimizer(scenario, params, ptc, seed, &mut optimizer)
}

/// Runs the planner, calling `optimizer` in place of the default one. The
/// optimizer is only used in [`PlannerMode::Bitkomo`].
pub fn plan_with_optimizer(
    scenario: &Scenario,
    params: &PlannerParams,
    ptc: &TerminationCondition,
    seed: u64,
    optimizer: &mut dyn PathOptimizer,
) -> Result<PlanResult, ContractError> {
    params.validate()?;
    ptc.validate()?;
    for (what, q) in [("start", &scenario.start), ("goal", &scenario.goal)] {
        if !scenario.is_valid_config(q)? {
            return Err(ContractError::Violation(format!("{what} is not in free space")));
        }
    }
    let mut run = Run::new(scenario, params, ptc, seed);
    match params.mode {
        PlannerMode::KomoRestarts => run.restarts(),
        PlannerMode::Bitstar => run.tree_search(None),
        PlannerMode::Bitkomo => run.tree_search(Some(optimizer)),
    }
    Ok(run.finish())
}

struct Run<'a> {
    scenario: &'a Scenario,
    params: &'a PlannerParams,
    ptc: &'a TerminationCondition,
    seed: u64,
    started: Instant,
    deadline: Instant,
    c_best: f64,
    best_path: Option<Vec<Configuration>>,
    events: Vec<PlanEvent>,
    solutions: Vec<Solution>,
    stats: PlanStats,
}

impl<'a> Run<'a> {
    fn new(scenario: &'a Scenario, params: &'a PlannerParams, ptc: &'a TerminationCondition, seed: u64) -> Self {
        let started = Instant::now();
        Run {
            scenario,
            params,
            ptc,
            seed,
            started,
            deadline: started + ptc.budget,
            c_best: f64::INFINITY,
            best_path: None,
            events: Vec::new(),
            solutions: Vec::new(),
            stats: PlanStats::default(),
        }
    }

    fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    fn should_stop(&self) -> bool {
        if self.ptc.target_cost.is_some_and(|t| self.c_best <= t) {
            return true;
        }
        if self.ptc.max_iterations.is_some_and(|n| self.stats.iterations >= n) {
            return true;
        }
        Instant::now() >= self.deadline
    }

    fn emit(&mut self, kind: EventKind, cost: Option<f64>) {
        let elapsed = self.elapsed();
        self.events.push(PlanEvent { elapsed, kind, cost });
    }

    fn validation_resolution(&self) -> f64 {
        self.params.resolution / VALIDATION_REFINEMENT
    }

    /// Records a new best solution; `cost` must beat `c_best`.
    fn improve(&mut self, cost: f64, path: Vec<Configuration>) {
        debug_assert!(cost < self.c_best);
        let kind = if self.best_path.is_none() {
            EventKind::FirstSolution
        } else {
            EventKind::Improvement
        };
        self.c_best = cost;
        self.emit(kind, Some(cost));
        let elapsed = self.elapsed();
        self.solutions.push(Solution {
            elapsed,
            cost,
            path: path.clone(),
        });
        self.best_path = Some(path);
    }

    /// Cost of a candidate path, clamped to the straight-line lower bound
    /// to absorb rounding.
    fn reported_cost(&self, path: &[Configuration]) -> f64 {
        komo::path_cost(path).max(self.scenario.min_cost())
    }

    /// Snaps the terminal waypoint to the goal and validates; returns the
    /// path and its cost when it is a usable solution.
    fn accept_optimized(&self, mut path: Vec<Configuration>) -> Option<(Vec<Configuration>, f64)> {
        *path.last_mut()? = self.scenario.goal.clone();
        if !validate_path(&path, self.scenario, self.validation_resolution()) {
            return None;
        }
        let cost = self.reported_cost(&path);
        Some((path, cost))
    }

    fn tree_search(&mut self, mut optimizer: Option<&mut dyn PathOptimizer>) {
        let scenario = self.scenario;
        let delta = if optimizer.is_some() { self.params.delta } else { 0 };
        let (mut state, mut ledger) = init_state(scenario);
        let mut sampler = Sampler::new(SamplerConfig {
            batch_size: self.params.batch_size,
            rng_seed: self.seed,
            rejection_cap: self.params.rejection_cap,
        });
        let measure = scenario.bounds.measure();
        let dim = scenario.dim();
        let mut radius = f64::INFINITY;
        let mut last_goal_cost = f64::INFINITY;
        let mut optimized: HashSet<u64> = HashSet::new();

        while !self.should_stop() {
            self.stats.iterations += 1;
            if state.vertex_queue_is_empty() && state.edge_queue_is_empty() {
                state.prune(ledger.c_i);
                last_goal_cost = last_goal_cost.min(state.goal_cost());
                let informed = InformedSet::new(scenario.start.clone(), scenario.goal.clone(), ledger.c_i);
                match sampler.sample_batch(scenario, &informed) {
                    Ok(batch) => state.add_samples(scenario, batch),
                    Err(_) => break,
                }
                state.enqueue_all_vertices();
                radius = connection_radius(state.num_nodes(), dim, measure, self.params.eta);
                self.stats.batches += 1;
                self.emit(EventKind::BatchAdded, None);
            }
            while state.best_vertex_value() != f64::INFINITY && state.best_vertex_value() <= state.best_edge_value() {
                state
                    .expand_next_vertex(&ledger, radius)
                    .expect("vertex queue checked non-empty");
            }
            let Some(edge) = state.pop_best_edge() else {
                continue;
            };
            if !state.edge_addition_helps(&ledger, &edge) {
                // Every queued edge and vertex has a key at least this large.
                state.clear_queues();
                continue;
            }
            let (src, dst) = (state.node(edge.source), state.node(edge.target));
            // An edge costs at least its length; skip checks that cannot pay off.
            let g_through = src.g + edge.c_hat;
            if g_through + dst.h_hat >= ledger.c_i || (dst.in_tree && g_through >= dst.g) {
                continue;
            }
            self.stats.edges_checked += 1;
            let outcome = check_edge_relaxed(scenario, &src.q, &dst.q, self.params.resolution);
            if outcome.cp > delta {
                continue;
            }
            let c_edge = penalized_edge_cost(edge.c_hat, outcome.cp, ledger.c_max);
            if !state.edge_improves_cost(&ledger, &edge, c_edge) {
                continue;
            }
            if outcome.cp > 0 {
                self.stats.penalized_edges += 1;
            }
            state.add_edge_to_tree(&edge, c_edge);
            let g_goal = state.goal_cost();
            ledger.c_i = ledger.c_i.min(g_goal);
            if g_goal >= last_goal_cost {
                continue;
            }
            last_goal_cost = g_goal;
            let path = state.get_best_path().expect("goal cost is finite");
            if g_goal < ledger.c_max
                && g_goal < self.c_best
                && validate_path(&path, scenario, self.validation_resolution())
            {
                let cost = g_goal.max(scenario.min_cost());
                self.improve(cost, path.clone());
            }
            if let Some(opt) = optimizer.as_deref_mut() {
                if optimized.insert(path_hash(&path)) {
                    self.run_optimizer(opt, &path, &mut ledger);
                }
            }
        }
    }

    fn run_optimizer(&mut self, optimizer: &mut dyn PathOptimizer, path: &[Configuration], ledger: &mut CostLedger) {
        self.stats.optimizer_calls += 1;
        let deadline = self.deadline;
        let mut stop = || Instant::now() >= deadline;
        let result = optimizer.optimize(self.scenario, path, &mut stop);
        match result.and_then(|p| self.accept_optimized(p)) {
            Some((opt_path, cost)) if cost < self.c_best => {
                ledger.c_i = ledger.c_i.min(cost);
                self.emit(EventKind::OptimizerSuccess, Some(cost));
                self.improve(cost, opt_path);
            }
            Some((_, cost)) => self.emit(EventKind::OptimizerFailure, Some(cost)),
            None => self.emit(EventKind::OptimizerFailure, None),
        }
    }

    /// Repeated optimization from noisy constant-start seeds.
    fn restarts(&mut self) {
        let scenario = self.scenario;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let ranges: Vec<f64> = scenario.bounds.ranges().collect();
        while !self.should_stop() {
            self.stats.iterations += 1;
            let mut waypoints = Vec::with_capacity(self.params.waypoints + 1);
            waypoints.push(scenario.start.clone());
            for _ in 0..self.params.waypoints {
                let q: Vec<f64> = scenario
                    .start
                    .iter()
                    .zip(&ranges)
                    .map(|(s, r)| s + rng.random_range(-RESTART_NOISE..=RESTART_NOISE) * r)
                    .collect();
                waypoints.push(q.into());
            }
            let problem =
                komo::from_waypoints(scenario, waypoints, self.params.margin).with_segment_checks(self.params.segment_checks);
            self.stats.optimizer_calls += 1;
            let deadline = self.deadline;
            let result = optimize_with_repair(
                problem,
                &self.params.al,
                Some(self.validation_resolution()),
                DEFAULT_REPAIR_ROUNDS,
                &mut || Instant::now() >= deadline,
            );
            let accepted = result.feasible.then_some(result.waypoints).and_then(|p| self.accept_optimized(p));
            match accepted {
                Some((path, cost)) if cost < self.c_best => {
                    self.emit(EventKind::OptimizerSuccess, Some(cost));
                    self.improve(cost, path);
                }
                Some((_, cost)) => self.emit(EventKind::OptimizerFailure, Some(cost)),
                None => self.emit(EventKind::OptimizerFailure, None),
            }
        }
    }

    fn finish(self) -> PlanResult {
        PlanResult {
            best_path: self.best_path,
            c_best: self.c_best,
            events: self.events,
            solutions: self.solutions,
            rng_seed: self.seed,
            stats: self.stats,
        }
    }
}

fn path_hash(path: &[Configuration]) -> u64 {
    let mut h = DefaultHasher::new();
    for q in path {
        for v in q.iter() {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cspace::{distance, Bounds, Obstacle, RobotModel};

    fn empty_square() -> Scenario {
        Scenario::new(
            "empty",
            Bounds(vec![[0.0, 1.0], [0.0, 1.0]]),
            vec![],
            RobotModel::Disc { radius: 0.02 },
            [0.1, 0.1].into(),
            [0.9, 0.9].into(),
        )
        .unwrap()
    }

    #[test]
    fn penalized_cost_formula() {
        let c_max = 4.2426;
        assert_eq!(penalized_edge_cost(1.0, 0, c_max), 1.0);
        assert!((penalized_edge_cost(1.0, 1, c_max) - 5.2426).abs() < 1e-12);
        assert!((penalized_edge_cost(0.5, 3, 2.0) - 6.5).abs() < 1e-15);
    }

    #[test]
    fn every_mode_solves_the_empty_square() {
        let s = empty_square();
        for mode in [PlannerMode::Bitkomo, PlannerMode::Bitstar, PlannerMode::KomoRestarts] {
            let params = PlannerParams::for_scenario(&s, mode);
            let ptc = TerminationCondition::budget(1.0).with_target(s.min_cost() + 1e-9);
            let r = plan(&s, &params, &ptc, 7).unwrap();
            assert!(r.solved(), "{mode}");
            assert!((r.c_best - s.min_cost()).abs() < 1e-6, "{mode}: {}", r.c_best);
            assert_eq!(r.rng_seed, 7);
        }
    }

    #[test]
    fn collision_points_mark_the_deepest_sample_of_each_run() {
        let s = Scenario::new(
            "disc",
            Bounds(vec![[0.0, 1.0], [0.0, 1.0]]),
            vec![Obstacle::disc([0.5, 0.5], 0.1)],
            RobotModel::Disc { radius: 0.02 },
            [0.1, 0.5].into(),
            [0.9, 0.9].into(),
        )
        .unwrap();
        let path: Vec<Configuration> = vec![s.start.clone(), [0.9, 0.5].into(), s.goal.clone()];
        let found = collision_points(&path, &s, 0.01);
        assert_eq!(found.len(), 1);
        let (t, at) = found[0];
        assert_eq!(t, 1);
        assert!((at - 0.5).abs() < 0.02, "deepest point near the centre, got s = {at}");
        let clear: Vec<Configuration> = vec![s.start.clone(), [0.1, 0.9].into(), s.goal.clone()];
        assert!(collision_points(&clear, &s, 0.01).is_empty());
    }

    #[test]
    fn repair_clears_chords_that_cut_an_obstacle() {
        // Without interior checks the waypoints hug the disc and every
        // segment between them cuts a chord through it.
        let s = Scenario::new(
            "disc",
            Bounds(vec![[0.0, 1.0], [0.0, 1.0]]),
            vec![Obstacle::disc([0.5, 0.5], 0.2)],
            RobotModel::Disc { radius: 0.01 },
            [0.1, 0.5].into(),
            [0.9, 0.5].into(),
        )
        .unwrap();
        let seed: Vec<Configuration> = vec![s.start.clone(), [0.5, 0.85].into(), s.goal.clone()];
        let resolution = 0.001;
        let problem = komo::build_problem(&seed, &s, 6, 0.005).unwrap().with_segment_checks(0);
        let al = AlParams::default();
        let snapped = |mut p: Vec<Configuration>| {
            *p.last_mut().unwrap() = s.goal.clone();
            p
        };
        let plain = komo::optimize_with(&problem, &al, &mut || false);
        assert!(plain.feasible);
        assert!(!validate_path(&snapped(plain.waypoints), &s, resolution), "the world should need the repair");
        let repaired = optimize_with_repair(problem, &al, Some(resolution), DEFAULT_REPAIR_ROUNDS, &mut || false);
        assert!(repaired.feasible);
        assert!(validate_path(&snapped(repaired.waypoints), &s, resolution));
    }

    #[test]
    fn validate_path_rejects_waypoint_in_obstacle() {
        let s = Scenario::new(
            "disc",
            Bounds(vec![[0.0, 1.0], [0.0, 1.0]]),
            vec![Obstacle::disc([0.5, 0.5], 0.1)],
            RobotModel::Disc { radius: 0.02 },
            [0.1, 0.5].into(),
            [0.9, 0.5].into(),
        )
        .unwrap();
        let detour: Vec<Configuration> = vec![s.start.clone(), [0.5, 0.9].into(), s.goal.clone()];
        assert!(validate_path(&detour, &s, 0.01));
        let through: Vec<Configuration> = vec![s.start.clone(), [0.5, 0.5].into(), s.goal.clone()];
        assert!(!validate_path(&through, &s, 0.01));
        let straight = vec![s.start.clone(), s.goal.clone()];
        assert!(!validate_path(&straight, &s, 0.01));
        assert!(distance(&s.start, &s.goal) > 0.0);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [PlannerMode::Bitkomo, PlannerMode::Bitstar, PlannerMode::KomoRestarts] {
            assert_eq!(m.name().parse::<PlannerMode>().unwrap(), m);
        }
        assert!("rrt".parse::<PlannerMode>().is_err());
        assert_eq!("batch_added".parse::<EventKind>().unwrap(), EventKind::BatchAdded);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let s = empty_square();
        let mut params = PlannerParams::for_scenario(&s, PlannerMode::Bitstar);
        params.resolution = 0.0;
        assert!(plan(&s, &params, &TerminationCondition::budget(0.1), 0).is_err());
        let params = PlannerParams::for_scenario(&s, PlannerMode::Bitstar);
        assert!(plan(&s, &params, &TerminationCondition::budget(0.0), 0).is_err());
    }
}
