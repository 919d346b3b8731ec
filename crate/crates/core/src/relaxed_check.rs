//! Level-wise edge checking that reports how early a collision was found.
//!
//! The interior of an edge is discretized into `n_d` equally spaced points.
//! Level 1 is the midpoint, level 2 the quarter points, and so on; each
//! dyadic parameter is snapped to the nearest grid index not yet claimed by a
//! coarser level (ties toward the lower index). The last level also picks up
//! whatever grid indices remain. A collision first seen at level `Lc` yields
//! the penalty `CP = L - Lc + 1`, so coarse hits (large colliding fraction)
//! are penalized the most.

use crate::cspace::{distance, lerp, ContractError, Scenario};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCheckConfig {
    /// Maximum spacing between consecutive checked states.
    pub resolution: f64,
    /// Largest penalty still admitted into the tree.
    pub delta: u32,
}

impl EdgeCheckConfig {
    pub fn new(resolution: f64, delta: u32) -> Result<Self, ContractError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(ContractError::Violation(format!(
                "edge resolution must be > 0, got {resolution}"
            )));
        }
        Ok(EdgeCheckConfig { resolution, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOutcome {
    pub cp: u32,
    pub levels: u32,
    pub failed_level: Option<u32>,
    pub points_checked: usize,
}

/// Number of interior points so that consecutive checked states are at most
/// `resolution` apart. Endpoints are excluded.
pub fn num_interior_points(a: &[f64], b: &[f64], resolution: f64) -> usize {
    interior_points_for_length(distance(a, b), resolution)
}

pub(crate) fn interior_points_for_length(length: f64, resolution: f64) -> usize {
    let k = (length / resolution).ceil();
    if k.is_finite() && k > 2.0 {
        k as usize - 1
    } else {
        1
    }
}

/// Number of levels needed to reach every one of `n_d` grid points:
/// `ceil(log2(n_d + 1))`, i.e. the smallest `L` with `2^L - 1 >= n_d`.
pub fn num_levels(n_d: usize) -> u32 {
    assert!(n_d >= 1);
    usize::BITS - n_d.leading_zeros()
}

/// Grid indices (1-based, index `j` sits at `s = j / (n_d + 1)`) checked at
/// each level, each level sorted by increasing `s`.
pub fn level_schedule(n_d: usize) -> Vec<Vec<usize>> {
    let levels = num_levels(n_d);
    let mut unvisited: BTreeSet<usize> = (1..=n_d).collect();
    let scale = (n_d + 1) as f64;
    let mut schedule = Vec::with_capacity(levels as usize);
    for level in 1..=levels {
        let denom = (1u64 << level) as f64;
        let mut picked = Vec::new();
        for j in (1..(1u64 << level)).step_by(2) {
            if unvisited.is_empty() {
                break;
            }
            // Continuous grid position of the dyadic parameter.
            let pos = j as f64 / denom * scale;
            let below = unvisited.range(..=pos.floor() as usize).next_back().copied();
            let above = unvisited.range(pos.ceil() as usize..).next().copied();
            let idx = match (below, above) {
                (Some(lo), Some(hi)) => {
                    if pos - lo as f64 <= hi as f64 - pos {
                        lo
                    } else {
                        hi
                    }
                }
                (Some(lo), None) => lo,
                (None, Some(hi)) => hi,
                (None, None) => unreachable!(),
            };
            unvisited.remove(&idx);
            picked.push(idx);
        }
        if level == levels {
            picked.extend(unvisited.iter().copied());
            unvisited.clear();
        }
        picked.sort_unstable();
        schedule.push(picked);
    }
    schedule
}

/// Interpolation parameters checked at `level` (1-based) for `n_d` points.
pub fn points_at_level(n_d: usize, level: u32) -> Result<Vec<f64>, ContractError> {
    if n_d == 0 {
        return Err(ContractError::Violation("n_d must be >= 1".into()));
    }
    let levels = num_levels(n_d);
    if level == 0 || level > levels {
        return Err(ContractError::Violation(format!(
            "level {level} outside [1, {levels}] for n_d = {n_d}"
        )));
    }
    let scale = (n_d + 1) as f64;
    Ok(level_schedule(n_d)[level as usize - 1]
        .iter()
        .map(|&j| j as f64 / scale)
        .collect())
}

/// Checks the interior of `a -> b` level by level and returns the collision
/// penalty. Endpoints are assumed valid.
pub fn check_edge_relaxed(scenario: &Scenario, a: &[f64], b: &[f64], resolution: f64) -> CheckOutcome {
    let n_d = num_interior_points(a, b, resolution);
    let levels = num_levels(n_d);
    let scale = (n_d + 1) as f64;
    let mut points_checked = 0;
    for (li, indices) in level_schedule(n_d).iter().enumerate() {
        for &j in indices {
            points_checked += 1;
            let q = lerp(a, b, j as f64 / scale);
            if !scenario.is_valid(&q) {
                let lc = li as u32 + 1;
                return CheckOutcome {
                    cp: levels - lc + 1,
                    levels,
                    failed_level: Some(lc),
                    points_checked,
                };
            }
        }
    }
    CheckOutcome {
        cp: 0,
        levels,
        failed_level: None,
        points_checked,
    }
}

/// Plain boolean check of all `n_d` interior points in grid order.
pub fn check_edge_full(scenario: &Scenario, a: &[f64], b: &[f64], resolution: f64) -> bool {
    let n_d = num_interior_points(a, b, resolution);
    let scale = (n_d + 1) as f64;
    (1..=n_d).all(|j| scenario.is_valid(&lerp(a, b, j as f64 / scale)))
}
