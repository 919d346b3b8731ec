//! Shortest-path reference cost for 2-D disc scenarios by Dijkstra on a
//! 16-connected grid.
//!
//! Grid nodes sit at `lo + (i, j) * cell` and must be valid configurations;
//! an edge is kept when densely sampled points along it are all valid. Start
//! and goal are joined to their nearest reachable cells by straight segments,
//! so the returned cost is the length of an actual collision-free polyline.
//! Restricting headings to 16 directions lengthens a straight line by at most
//! `1 / cos(atan(1/2) / 2) - 1`, about 2.8%, and snapping adds `O(cell)`.

use bitkomo::relaxed_check::check_edge_full;
use bitkomo::{distance, RobotModel, Scenario};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Default pitch as a fraction of the bounds diagonal.
pub const DEFAULT_CELL_FRACTION: f64 = 1.0 / 400.0;
/// Relative excess of a 16-connected path over the straight line.
pub const HEADING_EXCESS: f64 = 0.028;
/// Edges are checked at this fraction of the cell.
const EDGE_CHECK_FRACTION: f64 = 0.25;
/// How far (in cells) to look for a snapping target.
const SNAP_RADIUS_CELLS: i64 = 4;

const MOVES: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
];

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("the grid oracle needs a 2-D disc robot")]
    NotDiscRobot,
    #[error("cell must be positive and finite, got {0}")]
    BadCell(f64),
    #[error("no grid path from start to goal")]
    Unreachable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    /// Length of the grid path, including the snapping segments.
    pub cost: f64,
    /// The optimum lies in `[cost - bound, cost]`.
    pub bound: f64,
    pub cell: f64,
}

pub fn default_cell(scenario: &Scenario) -> f64 {
    DEFAULT_CELL_FRACTION * scenario.bounds.diagonal()
}

struct Grid<'a> {
    scenario: &'a Scenario,
    cell: f64,
    lo: [f64; 2],
    nx: i64,
    ny: i64,
    valid: Vec<bool>,
}

impl Grid<'_> {
    fn point(&self, i: i64, j: i64) -> [f64; 2] {
        [self.lo[0] + i as f64 * self.cell, self.lo[1] + j as f64 * self.cell]
    }

    fn index(&self, i: i64, j: i64) -> Option<usize> {
        (0..self.nx)
            .contains(&i)
            .then_some(())
            .filter(|_| (0..self.ny).contains(&j))
            .map(|_| (j * self.nx + i) as usize)
    }

    fn free_segment(&self, a: &[f64], b: &[f64]) -> bool {
        check_edge_full(self.scenario, a, b, EDGE_CHECK_FRACTION * self.cell)
    }

    /// Valid cells near `q` joined to it by a free segment, with the segment
    /// lengths.
    fn snap(&self, q: &[f64]) -> Vec<(usize, f64)> {
        let ci = ((q[0] - self.lo[0]) / self.cell).round() as i64;
        let cj = ((q[1] - self.lo[1]) / self.cell).round() as i64;
        let mut out = Vec::new();
        for dj in -SNAP_RADIUS_CELLS..=SNAP_RADIUS_CELLS {
            for di in -SNAP_RADIUS_CELLS..=SNAP_RADIUS_CELLS {
                let (i, j) = (ci + di, cj + dj);
                let Some(k) = self.index(i, j) else { continue };
                let p = self.point(i, j);
                if self.valid[k] && self.free_segment(q, &p) {
                    out.push((k, distance(q, &p)));
                }
            }
        }
        out
    }
}

/// Runs the oracle with pitch `cell`.
pub fn grid_oracle(scenario: &Scenario, cell: f64) -> Result<OracleResult, OracleError> {
    if !matches!(scenario.robot, RobotModel::Disc { .. }) {
        return Err(OracleError::NotDiscRobot);
    }
    if !(cell.is_finite() && cell > 0.0) {
        return Err(OracleError::BadCell(cell));
    }
    let b = &scenario.bounds;
    let lo = [b.lo(0), b.lo(1)];
    let nx = ((b.hi(0) - lo[0]) / cell).floor() as i64 + 1;
    let ny = ((b.hi(1) - lo[1]) / cell).floor() as i64 + 1;
    let mut grid = Grid {
        scenario,
        cell,
        lo,
        nx,
        ny,
        valid: Vec::new(),
    };
    grid.valid = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| scenario.is_valid(&grid.point(i, j)))
        .collect();

    let start = scenario.start.as_slice();
    let goal = scenario.goal.as_slice();
    let direct = if grid.free_segment(start, goal) {
        Some(distance(start, goal))
    } else {
        None
    };
    let targets = grid.snap(goal);
    let mut to_goal = vec![f64::INFINITY; grid.valid.len()];
    for &(k, d) in &targets {
        to_goal[k] = d;
    }

    // Dijkstra over cells; the key is the distance from the real start.
    let mut dist = vec![f64::INFINITY; grid.valid.len()];
    let mut heap = BinaryHeap::new();
    for (k, d) in grid.snap(start) {
        if d < dist[k] {
            dist[k] = d;
            heap.push((Reverse(OrdF64(d)), k));
        }
    }
    let mut best = direct.unwrap_or(f64::INFINITY);
    while let Some((Reverse(OrdF64(d)), k)) = heap.pop() {
        if d > dist[k] || d >= best {
            continue;
        }
        best = best.min(d + to_goal[k]);
        let (i, j) = (k as i64 % nx, k as i64 / nx);
        let here = grid.point(i, j);
        for (di, dj) in MOVES {
            let Some(m) = grid.index(i + di, j + dj) else { continue };
            if !grid.valid[m] {
                continue;
            }
            let step = cell * ((di * di + dj * dj) as f64).sqrt();
            if d + step >= dist[m] {
                continue;
            }
            let there = grid.point(i + di, j + dj);
            if grid.free_segment(&here, &there) {
                dist[m] = d + step;
                heap.push((Reverse(OrdF64(d + step)), m));
            }
        }
    }
    if !best.is_finite() {
        return Err(OracleError::Unreachable);
    }
    Ok(OracleResult {
        cost: best,
        bound: HEADING_EXCESS * best + 2.0 * std::f64::consts::SQRT_2 * cell,
        cell,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
