use super::geometry::{Obstacle, Shape};
use super::robot::RobotModel;
use super::{distance, Configuration, ContractError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("start not in free space")]
    StartNotFree,
    #[error("goal not in free space")]
    GoalNotFree,
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Axis-aligned box of admissible configurations (workspace bounds for a
/// disc, joint limits for an arm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bounds(pub Vec<[f64; 2]>);

impl Bounds {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.0[i][0]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.0[i][1]
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.iter().zip(&self.0).all(|(v, [lo, hi])| *lo <= *v && *v <= *hi)
    }

    /// Euclidean length of the box diagonal.
    pub fn diagonal(&self) -> f64 {
        self.0.iter().map(|[lo, hi]| (hi - lo) * (hi - lo)).sum::<f64>().sqrt()
    }

    /// Lebesgue measure of the box.
    pub fn measure(&self) -> f64 {
        self.0.iter().map(|[lo, hi]| hi - lo).product()
    }

    pub fn ranges(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|[lo, hi]| hi - lo)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    time_limit: Option<f64>,
    bounds: Bounds,
    start: Configuration,
    goal: Configuration,
    robot: RobotModel,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
}

/// A planning problem: bounds, obstacles, robot and endpoints.
///
/// Immutable once built; every constructor validates the invariants,
/// including that start and goal are collision free.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub bounds: Bounds,
    pub obstacles: Vec<Obstacle>,
    pub robot: RobotModel,
    pub start: Configuration,
    pub goal: Configuration,
    /// Default planning budget in seconds, if the document specifies one.
    pub time_limit: Option<f64>,
    shapes: Vec<Shape>,
}

impl PartialEq for Scenario {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.bounds == o.bounds
            && self.obstacles == o.obstacles
            && self.robot == o.robot
            && self.start == o.start
            && self.goal == o.goal
            && self.time_limit == o.time_limit
    }
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        bounds: Bounds,
        obstacles: Vec<Obstacle>,
        robot: RobotModel,
        start: Configuration,
        goal: Configuration,
    ) -> Result<Self, ScenarioError> {
        let name = name.into();
        robot.validate().map_err(|r| invalid("robot", r))?;
        let n = robot.dim();
        if bounds.dim() != n {
            return Err(invalid(
                "bounds",
                format!("{} intervals for a {n}-dimensional robot", bounds.dim()),
            ));
        }
        for (i, [lo, hi]) in bounds.0.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(invalid(format!("bounds[{i}]"), format!("need lo < hi, got [{lo}, {hi}]")));
            }
        }
        for (i, o) in obstacles.iter().enumerate() {
            o.validate().map_err(|r| invalid(format!("obstacles[{i}]"), r))?;
        }
        for (field, q) in [("start", &start), ("goal", &goal)] {
            if q.dim() != n {
                return Err(invalid(field, format!("has {} entries, expected {n}", q.dim())));
            }
            if !q.is_finite() {
                return Err(invalid(field, "non-finite entry"));
            }
        }
        let shapes = obstacles.iter().map(Obstacle::shape).collect();
        let scenario = Scenario {
            name,
            bounds,
            obstacles,
            robot,
            start,
            goal,
            time_limit: None,
            shapes,
        };
        if !scenario.is_valid(&scenario.start) {
            return Err(ScenarioError::StartNotFree);
        }
        if !scenario.is_valid(&scenario.goal) {
            return Err(ScenarioError::GoalNotFree);
        }
        Ok(scenario)
    }

    pub fn with_time_limit(mut self, seconds: Option<f64>) -> Self {
        self.time_limit = seconds;
        self
    }

    /// Parses a scenario document (TOML; grammar in the repository README).
    pub fn load(text: &str) -> Result<Self, ScenarioError> {
        let doc: ScenarioDoc = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if doc.dimension != doc.robot.dim() {
            return Err(invalid(
                "dimension",
                format!("declared {} but robot has {} degrees of freedom", doc.dimension, doc.robot.dim()),
            ));
        }
        if let Some(t) = doc.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("time_limit", format!("must be > 0, got {t}")));
            }
        }
        Ok(Scenario::new(doc.name, doc.bounds, doc.obstacles, doc.robot, doc.start, doc.goal)?
            .with_time_limit(doc.time_limit))
    }

    pub fn load_file(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::load(&text)
    }

    /// Renders the scenario in the document format accepted by [`Scenario::load`].
    pub fn to_document(&self) -> String {
        let doc = ScenarioDoc {
            name: self.name.clone(),
            dimension: self.dim(),
            time_limit: self.time_limit,
            bounds: self.bounds.clone(),
            start: self.start.clone(),
            goal: self.goal.clone(),
            robot: self.robot.clone(),
            obstacles: self.obstacles.clone(),
        };
        toml::to_string(&doc).expect("scenario documents always serialize")
    }

    pub fn dim(&self) -> usize {
        self.robot.dim()
    }

    /// `3 x` the bounds diagonal: the penalty unit for relaxed edges.
    pub fn max_cost(&self) -> f64 {
        3.0 * self.bounds.diagonal()
    }

    /// Straight-line distance between start and goal.
    pub fn min_cost(&self) -> f64 {
        distance(&self.start, &self.goal)
    }

    fn check_dim(&self, q: &[f64]) -> Result<(), ContractError> {
        if q.len() != self.dim() {
            return Err(ContractError::DimensionMismatch {
                expected: self.dim(),
                actual: q.len(),
            });
        }
        Ok(())
    }

    /// Point validity: inside the bounds and not overlapping any obstacle.
    /// Touching (clearance exactly zero) counts as valid.
    pub fn is_valid_config(&self, q: &[f64]) -> Result<bool, ContractError> {
        self.check_dim(q)?;
        Ok(self.is_valid(q))
    }

    /// Unchecked variant of [`Scenario::is_valid_config`] for hot loops.
    pub fn is_valid(&self, q: &[f64]) -> bool {
        debug_assert_eq!(q.len(), self.dim());
        self.bounds.contains(q) && !self.robot.collides(&self.shapes, q)
    }

    /// Minimum signed distance between the robot body and the obstacles,
    /// with its gradient in configuration space. `+inf` without obstacles.
    pub fn signed_clearance(&self, q: &[f64]) -> Result<(f64, Vec<f64>), ContractError> {
        self.check_dim(q)?;
        Ok(self.robot.clearance(&self.shapes, q))
    }

    /// Signed clearance of every obstacle and body-part pair; the minimum
    /// over the terms is the clearance. Empty without obstacles.
    pub fn clearance_terms(&self, q: &[f64]) -> Result<Vec<(f64, Vec<f64>)>, ContractError> {
        self.check_dim(q)?;
        Ok(self.robot.clearance_terms(&self.shapes, q, true))
    }

    /// Values of [`Scenario::clearance_terms`] without gradients.
    pub fn clearance_term_values(&self, q: &[f64]) -> Vec<f64> {
        self.robot.clearance_terms(&self.shapes, q, false).into_iter().map(|(d, _)| d).collect()
    }

    pub fn clearance_value(&self, q: &[f64]) -> f64 {
        self.robot.clearance_value(&self.shapes, q)
    }

    pub fn has_obstacles(&self) -> bool {
        !self.shapes.is_empty()
    }
}
