//! Configuration spaces, scenarios and clearance queries.
//!
//! A [`Scenario`] bundles the box of admissible configurations, a list of
//! primitive obstacles, the robot model and the start/goal pair. Clearance is
//! computed in closed form so trajectory optimization gets exact Jacobians.

mod geometry;
mod robot;
mod scenario;

pub use geometry::{Obstacle, Segment, Vec2};
pub use robot::RobotModel;
pub use scenario::{Bounds, Scenario, ScenarioError};

use serde::{Deserialize, Serialize};
use std::ops::{Deref, DerefMut};
use thiserror::Error;

/// Violations of an operation's preconditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("interpolation parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("{0}")]
    Violation(String),
}

/// A point of the configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<f64>);

impl Configuration {
    pub fn new(q: Vec<f64>) -> Self {
        Configuration(q)
    }

    pub fn zeros(n: usize) -> Self {
        Configuration(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Configuration {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Configuration {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Configuration {
    fn from(q: Vec<f64>) -> Self {
        Configuration(q)
    }
}

impl<const N: usize> From<[f64; N]> for Configuration {
    fn from(q: [f64; N]) -> Self {
        Configuration(q.to_vec())
    }
}

/// Euclidean distance between two configurations.
///
/// Summed over a polyline this is the path-length cost the planner minimizes.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Straight-line interpolation `(1 - s) a + s b`.
pub fn interpolate(a: &[f64], b: &[f64], s: f64) -> Result<Configuration, ContractError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(ContractError::ParameterOutOfRange(s));
    }
    if a.len() != b.len() {
        return Err(ContractError::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(lerp(a, b, s))
}

/// Unchecked interpolation used on hot paths where `s` is known to be valid.
pub(crate) fn lerp(a: &[f64], b: &[f64], s: f64) -> Configuration {
    if s == 0.0 {
        return Configuration(a.to_vec());
    }
    if s == 1.0 {
        return Configuration(b.to_vec());
    }
    Configuration(a.iter().zip(b).map(|(x, y)| (1.0 - s) * x + s * y).collect())
}

/// Length of a polyline through `points`.
pub fn polyline_length<C: AsRef<[f64]>>(points: &[C]) -> f64 {
    points
        .windows(2)
        .map(|w| distance(w[0].as_ref(), w[1].as_ref()))
        .sum()
}

impl AsRef<[f64]> for Configuration {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
