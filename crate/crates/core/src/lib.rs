//! Hybrid optimal motion planning: batch informed trees with relaxed edge
//! checking, interleaved with k-order Markov trajectory optimization.

pub mod bitstar;
pub mod cspace;
pub mod komo;
pub mod planner;
pub mod relaxed_check;
pub mod sampling;

pub use cspace::{distance, interpolate, Configuration, ContractError, Obstacle, RobotModel, Scenario};
pub use planner::{plan, EventKind, PlanEvent, PlanResult, PlannerMode, PlannerParams, TerminationCondition};
