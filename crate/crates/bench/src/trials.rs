//! Repeated planner runs with consecutive seeds, spread over worker threads.

use crate::records::TrialRecord;
use bitkomo::planner::{plan_with_optimizer, KomoOptimizer, PathOptimizer};
use bitkomo::{ContractError, PlanResult, PlannerParams, Scenario, TerminationCondition};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Builds a fresh optimizer for each trial.
pub type OptimizerFactory<'a> = dyn Fn() -> Box<dyn PathOptimizer> + Sync + 'a;

/// Runs `n_trials` plans with the default optimizer; trial `i` uses seed
/// `base_seed + i`. Results come back in trial order.
pub fn plan_trials(
    scenario: &Scenario,
    params: &PlannerParams,
    ptc: &TerminationCondition,
    n_trials: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<PlanResult>, ContractError> {
    let factory = || Box::new(KomoOptimizer::from_params(params)) as Box<dyn PathOptimizer>;
    plan_trials_with(scenario, params, ptc, n_trials, base_seed, workers, &factory)
}

/// [`plan_trials`] with a caller-supplied optimizer per trial.
pub fn plan_trials_with(
    scenario: &Scenario,
    params: &PlannerParams,
    ptc: &TerminationCondition,
    n_trials: usize,
    base_seed: u64,
    workers: usize,
    make_optimizer: &OptimizerFactory<'_>,
) -> Result<Vec<PlanResult>, ContractError> {
    if n_trials == 0 {
        return Err(ContractError::Violation("need at least one trial".into()));
    }
    params.validate()?;
    ptc.validate()?;
    let run = |i: usize| {
        let mut optimizer = make_optimizer();
        plan_with_optimizer(scenario, params, ptc, base_seed.wrapping_add(i as u64), optimizer.as_mut())
    };
    let workers = workers.clamp(1, n_trials);
    if workers == 1 {
        return (0..n_trials).map(run).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<PlanResult, ContractError>>>> = Mutex::new(vec![None; n_trials]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_trials {
                    break;
                }
                let result = run(i);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers have finished")
        .into_iter()
        .map(|slot| slot.expect("every trial index is claimed once"))
        .collect()
}

/// [`plan_trials`] reduced to event records.
pub fn run_trials(
    scenario: &Scenario,
    params: &PlannerParams,
    ptc: &TerminationCondition,
    n_trials: usize,
    base_seed: u64,
    workers: usize,
) -> Result<Vec<TrialRecord>, ContractError> {
    Ok(plan_trials(scenario, params, ptc, n_trials, base_seed, workers)?
        .iter()
        .map(|r| TrialRecord::from_result(&scenario.name, params.mode, r))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bitkomo::cspace::Bounds;
    use bitkomo::planner::FailingOptimizer;
    use bitkomo::{EventKind, PlannerMode, RobotModel};

    fn empty() -> Scenario {
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
    fn two_trials_on_an_empty_world_both_solve() {
        let s = empty();
        let params = PlannerParams::for_scenario(&s, PlannerMode::Bitkomo);
        let recs = run_trials(&s, &params, &TerminationCondition::budget(0.3), 2, 10, 1).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!((recs[0].seed, recs[1].seed), (10, 11));
        for r in &recs {
            assert!(r.rows.iter().any(|row| row.event == EventKind::FirstSolution));
        }
    }

    #[test]
    fn results_keep_trial_order_with_many_workers() {
        let s = empty();
        let params = PlannerParams::for_scenario(&s, PlannerMode::Bitstar);
        let ptc = TerminationCondition::budget(5.0).with_max_iterations(200);
        let results = plan_trials(&s, &params, &ptc, 5, 100, 3).unwrap();
        let seeds: Vec<u64> = results.iter().map(|r| r.rng_seed).collect();
        assert_eq!(seeds, vec![100, 101, 102, 103, 104]);
    }

    #[test]
    fn zero_trials_and_bad_params_are_rejected() {
        let s = empty();
        let mut params = PlannerParams::for_scenario(&s, PlannerMode::Bitstar);
        let ptc = TerminationCondition::budget(0.1);
        assert!(run_trials(&s, &params, &ptc, 0, 0, 1).is_err());
        params.resolution = -1.0;
        assert!(run_trials(&s, &params, &ptc, 3, 0, 2).is_err());
    }

    #[test]
    fn factory_supplies_the_optimizer() {
        let s = empty();
        let params = PlannerParams::for_scenario(&s, PlannerMode::Bitkomo);
        let ptc = TerminationCondition::budget(5.0).with_max_iterations(300);
        let failing = || Box::new(FailingOptimizer) as Box<dyn PathOptimizer>;
        let results = plan_trials_with(&s, &params, &ptc, 2, 0, 1, &failing).unwrap();
        for r in results {
            assert!(r.events.iter().all(|e| e.kind != EventKind::OptimizerSuccess));
        }
    }
}
