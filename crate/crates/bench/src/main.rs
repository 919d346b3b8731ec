use bitkomo::{PlannerMode, PlannerParams, Scenario, TerminationCondition};
use bitkomo_bench::aggregate::{aggregate, default_grid, write_series};
use bitkomo_bench::oracle::{default_cell, grid_oracle, OracleError};
use bitkomo_bench::records::{emit_csv, parse_csv};
use bitkomo_bench::{run_trials, scenarios};
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Budget used when neither the command line nor the scenario sets one.
const FALLBACK_TIME_LIMIT_S: f64 = 10.0;

#[derive(Parser)]
#[command(name = "bitkomo", version, about = "Anytime motion planning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more planning trials and write their events as CSV.
    Plan(PlanArgs),
    /// Reduce an event CSV to success rate and cost quantiles over time.
    Aggregate(AggregateArgs),
    /// Grid shortest-path cost of a 2-D disc scenario.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "bitkomo")]
    mode: PlannerMode,
    /// Seconds per trial; defaults to the scenario's own limit.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Seed of the first trial; trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    waypoints: Option<usize>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    segment_checks: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// End of the time grid; defaults to the latest event time.
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    scenario: String,
    /// Grid pitch; defaults to 1/400 of the bounds diagonal.
    #[arg(long)]
    cell: Option<f64>,
}

enum Failure {
    Usage(String),
    Scenario(String),
    NoSolution(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Scenario(_) => 2,
            Failure::NoSolution(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Scenario(m) | Failure::NoSolution(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn load(arg: &str) -> Result<Scenario, Failure> {
    scenarios::resolve(arg).map_err(|e| Failure::Scenario(format!("{arg}: {e}")))
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn plan(args: PlanArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    let mut params = PlannerParams::for_scenario(&scenario, args.mode);
    if let Some(v) = args.delta {
        params.delta = v;
    }
    if let Some(v) = args.batch_size {
        params.batch_size = v;
    }
    if let Some(v) = args.waypoints {
        params.waypoints = v;
    }
    if let Some(v) = args.resolution {
        params.resolution = v;
    }
    if let Some(v) = args.margin {
        params.margin = v;
    }
    if let Some(v) = args.segment_checks {
        params.segment_checks = v;
    }
    if let Some(v) = args.eta {
        params.eta = v;
    }
    let budget = args.time_limit.or(scenario.time_limit).unwrap_or(FALLBACK_TIME_LIMIT_S);
    if !(budget.is_finite() && budget > 0.0) {
        return Err(usage(format!("--time-limit must be positive, got {budget}")));
    }
    let ptc = TerminationCondition::budget(budget);
    let records = run_trials(&scenario, &params, &ptc, args.trials, args.seed, args.workers).map_err(usage)?;
    for r in &records {
        match r.final_cost() {
            Some(c) => eprintln!("seed {}: c_best {c}", r.seed),
            None => eprintln!("seed {}: no solution", r.seed),
        }
    }
    let mut out = open_out(&args.out)?;
    emit_csv(&records, &mut out).map_err(usage)?;
    out.flush().map_err(usage)?;
    let solved = records.iter().filter(|r| r.first_solution().is_some()).count();
    eprintln!("{solved}/{} trials solved", records.len());
    if solved == 0 {
        return Err(Failure::NoSolution("no trial found a solution".into()));
    }
    Ok(())
}

fn aggregate_cmd(args: AggregateArgs) -> Result<(), Failure> {
    let file = File::open(&args.input).map_err(|e| usage(format!("{}: {e}", args.input.display())))?;
    let records = parse_csv(file).map_err(|e| usage(format!("{}: {e}", args.input.display())))?;
    let latest = records
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.elapsed_s))
        .fold(0.0, f64::max);
    let budget = args.budget.unwrap_or(latest);
    if !(budget.is_finite() && budget > 0.0) {
        return Err(usage(format!("time grid end must be positive, got {budget}")));
    }
    let series = aggregate(&records, &default_grid(budget)).map_err(usage)?;
    let mut out = open_out(&args.out)?;
    write_series(&series, &mut out).map_err(usage)?;
    out.flush().map_err(usage)
}

fn oracle_cmd(args: OracleArgs) -> Result<(), Failure> {
    let scenario = load(&args.scenario)?;
    let cell = args.cell.unwrap_or_else(|| default_cell(&scenario));
    match grid_oracle(&scenario, cell) {
        Ok(r) => {
            println!("cost {}", r.cost);
            println!("bound {}", r.bound);
            println!("cell {}", r.cell);
            Ok(())
        }
        Err(e @ OracleError::NotDiscRobot) => Err(Failure::Scenario(e.to_string())),
        Err(e @ OracleError::BadCell(_)) => Err(usage(e)),
        Err(e @ OracleError::Unreachable) => Err(Failure::NoSolution(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Plan(args) => plan(args),
        Command::Aggregate(args) => aggregate_cmd(args),
        Command::Oracle(args) => oracle_cmd(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
