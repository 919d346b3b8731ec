//! Success rate and best-cost quantiles over trials, on a time grid.

use crate::records::{format_real, TrialRecord};
use std::io::Write;
use thiserror::Error;

pub const GRID_START_S: f64 = 0.01;
pub const GRID_POINTS: usize = 100;
pub const AGGREGATE_HEADER: [&str; 5] = ["t", "success_rate", "cost_median", "cost_q25", "cost_q75"];

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("no trial records to aggregate")]
    Empty,
}

/// `points` times from `start` to `end`, equally spaced in log time. A
/// budget at or below `start` gives the single point `end`.
pub fn log_time_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    assert!(start > 0.0 && end > 0.0 && points >= 1);
    if end <= start || points == 1 {
        return vec![end];
    }
    let (a, b) = (start.ln(), end.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                end
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// The default grid for a run budget.
pub fn default_grid(budget_s: f64) -> Vec<f64> {
    log_time_grid(GRID_START_S, budget_s, GRID_POINTS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePoint {
    pub t: f64,
    pub success_rate: f64,
    /// Quantiles of the best cost so far among trials solved by `t`;
    /// `None` when no trial is solved yet.
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub points: Vec<AggregatePoint>,
}

/// Quantile `p` of ascending `sorted` by linear interpolation between order
/// statistics.
pub fn quantile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * w)
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Success counts come from first-solution times only; costs use the last
/// reported cost at or before each grid time.
pub fn aggregate(records: &[TrialRecord], grid: &[f64]) -> Result<AggregateSeries, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::Empty);
    }
    let n = records.len() as f64;
    let points = grid
        .iter()
        .map(|&t| {
            let solved = records.iter().filter(|r| r.first_solution().is_some_and(|s| s <= t)).count();
            let mut costs: Vec<f64> = records.iter().filter_map(|r| r.cost_at(t)).collect();
            costs.sort_by(f64::total_cmp);
            AggregatePoint {
                t,
                success_rate: solved as f64 / n,
                median: quantile(&costs, 0.5),
                q25: quantile(&costs, 0.25),
                q75: quantile(&costs, 0.75),
            }
        })
        .collect();
    Ok(AggregateSeries { points })
}

/// Writes the series; unsolved grid points leave the cost columns empty.
pub fn write_series<W: Write>(series: &AggregateSeries, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    let cell = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    for p in &series.points {
        w.write_record([
            format_real(p.t),
            format_real(p.success_rate),
            cell(p.median),
            cell(p.q25),
            cell(p.q75),
        ])?;
    }
    w.flush()?;
    Ok(())
}
