//! Per-trial event records and their CSV form.
//!
//! One CSV row per planner event, header
//! `scenario,mode,seed,elapsed_s,event,cost`. Consecutive rows that share
//! `(scenario, mode, seed)` belong to one trial. Reals are written with nine
//! significant digits in fixed notation; events without a cost leave the
//! column empty.

use bitkomo::{EventKind, PlanResult, PlannerMode};
use std::io::{Read, Write};
use thiserror::Error;

pub const CSV_HEADER: [&str; 6] = ["scenario", "mode", "seed", "elapsed_s", "event", "cost"];

const SIGNIFICANT_DIGITS: i32 = 9;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub elapsed_s: f64,
    pub event: EventKind,
    pub cost: Option<f64>,
}

/// Timestamped events of one planning run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub scenario: String,
    pub mode: PlannerMode,
    pub seed: u64,
    pub rows: Vec<Row>,
}

impl TrialRecord {
    pub fn from_result(scenario: &str, mode: PlannerMode, result: &PlanResult) -> Self {
        TrialRecord {
            scenario: scenario.to_string(),
            mode,
            seed: result.rng_seed,
            rows: result
                .events
                .iter()
                .map(|e| Row {
                    elapsed_s: e.elapsed,
                    event: e.kind,
                    cost: e.cost,
                })
                .collect(),
        }
    }

    /// Time of the first solution, if any.
    pub fn first_solution(&self) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.event == EventKind::FirstSolution)
            .map(|r| r.elapsed_s)
    }

    /// Best cost reported at or before `t`.
    pub fn cost_at(&self, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.event.is_solution() && r.elapsed_s <= t)
            .filter_map(|r| r.cost)
            .last()
    }

    pub fn final_cost(&self) -> Option<f64> {
        self.cost_at(f64::INFINITY)
    }
}

/// Fixed-notation rendering with nine significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let mut decimals = (SIGNIFICANT_DIGITS - 1 - exponent).max(0);
    let mut s = format!("{:.*}", decimals as usize, x);
    // Rounding can carry into a new leading digit (9.99... -> 10.0...).
    let digits = |s: &str| s.replace(['-', '.'], "").trim_start_matches('0').len();
    if decimals > 0 && digits(&s) > SIGNIFICANT_DIGITS as usize {
        decimals -= 1;
        s = format!("{:.*}", decimals as usize, x);
    }
    s
}

pub fn emit_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), RecordError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for rec in records {
        let seed = rec.seed.to_string();
        for row in &rec.rows {
            let cost = row.cost.map(format_real).unwrap_or_default();
            w.write_record([
                rec.scenario.as_str(),
                rec.mode.name(),
                &seed,
                &format_real(row.elapsed_s),
                row.event.name(),
                &cost,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv_string(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    emit_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>, RecordError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(RecordError::Parse {
            line: 1,
            reason: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }
    let mut records: Vec<TrialRecord> = Vec::new();
    for result in reader.records() {
        let fields = result?;
        let line = fields.position().map_or(0, |p| p.line());
        let bad = |reason: String| RecordError::Parse { line, reason };
        let scenario = &fields[0];
        let mode: PlannerMode = fields[1].parse().map_err(bad)?;
        let seed: u64 = fields[2].parse().map_err(|e| bad(format!("seed: {e}")))?;
        let elapsed_s: f64 = fields[3].parse().map_err(|e| bad(format!("elapsed_s: {e}")))?;
        let event: EventKind = fields[4].parse().map_err(bad)?;
        let cost = match &fields[5] {
            "" => None,
            c => Some(c.parse::<f64>().map_err(|e| bad(format!("cost: {e}")))?),
        };
        if event.is_solution() && !cost.is_some_and(f64::is_finite) {
            return Err(bad(format!("{event} needs a finite cost")));
        }
        let row = Row { elapsed_s, event, cost };
        match records.last_mut() {
            Some(r) if r.scenario == scenario && r.mode == mode && r.seed == seed => {
                if r.rows.last().is_some_and(|prev| prev.elapsed_s > elapsed_s) {
                    return Err(bad("rows of a trial must be time-ordered".into()));
                }
                r.rows.push(row);
            }
            _ => records.push(TrialRecord {
                scenario: scenario.to_string(),
                mode,
                seed,
                rows: vec![row],
            }),
        }
    }
    Ok(records)
}
