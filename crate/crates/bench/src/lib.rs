//! Benchmark harness for the bitkomo planner: repeated trials, event CSVs,
//! success-rate and cost aggregation, a grid shortest-path oracle for 2-D
//! scenarios, and the bundled scenario files.

pub mod aggregate;
pub mod oracle;
pub mod records;
pub mod scenarios;
pub mod trials;

pub use aggregate::{aggregate, default_grid, AggregateSeries};
pub use oracle::{grid_oracle, OracleError, OracleResult};
pub use records::{emit_csv, parse_csv, TrialRecord};
pub use trials::{plan_trials, plan_trials_with, run_trials};
