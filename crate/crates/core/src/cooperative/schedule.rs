use super::groups::VariableGroup;
use super::ledger::{fitness_improvement, ContributionLedger};
use crate::domain::RandomStream;
use crate::error::{invalid, Result};
use crate::optimizers::Optimizer;
use crate::problem::{Candidate, LocalBudget, Problem, SubProblem};

/// One group-local sub-optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStep {
    pub group: usize,
    pub optimizer: usize,
    pub before: f64,
    pub after: f64,
    pub evaluations: u64,
}

/// Outcome of a cooperative schedule.
#[derive(Debug, Clone)]
pub struct CooperativeRun {
    pub best: Option<Candidate>,
    pub steps: Vec<GroupStep>,
    pub ledger: Option<ContributionLedger>,
}

/// A group paired with the optimizer in charge of it.
pub struct Phase {
    pub group: VariableGroup,
    pub optimizer: Box<dyn Optimizer>,
}

/// Returns the tracked incumbent, evaluating one random point if nothing
/// has been evaluated yet.
pub(crate) fn ensure_incumbent(problem: &mut dyn Problem, rng: &mut RandomStream) -> Option<Candidate> {
    if let Some(best) = problem.best() {
        return Some(best);
    }
    let x = problem.bounds().sample(rng);
    problem.evaluate(&x)?;
    problem.best()
}

/// Optimizes `indices` with every other dimension held at the incumbent,
/// spending at most `cap` evaluations. Returns the incumbent fitness before
/// and after, and the evaluations used.
pub fn optimize_group(
    problem: &mut dyn Problem,
    indices: &[usize],
    optimizer: &mut dyn Optimizer,
    cap: u64,
    rng: &mut RandomStream,
) -> Result<(f64, f64, u64)> {
    let incumbent = problem.best().ok_or_else(|| invalid("group optimization needs an evaluated incumbent"))?;
    let remaining = problem.remaining();
    {
        let mut local = LocalBudget::new(problem, cap);
        let mut sub = SubProblem::new(&mut local, incumbent.x, indices.to_vec())?;
        let start = Candidate::new(sub.extract(), incumbent.f);
        optimizer.optimize(&mut sub, Some(&start), rng);
    }
    let after = problem.best().map_or(incumbent.f, |b| b.f);
    Ok((incumbent.f, after, remaining - problem.remaining()))
}

/// Cycles through the phases, each optimizing its group from the current
/// incumbent with at most `cycle_budget` evaluations, until the budget is
/// spent or a whole cycle makes no evaluation.
pub fn alternating_schedule(
    problem: &mut dyn Problem,
    phases: &mut [Phase],
    cycle_budget: u64,
    rng: &mut RandomStream,
) -> Result<CooperativeRun> {
    if phases.is_empty() || cycle_budget == 0 {
        return Err(invalid("an alternating schedule needs phases and a positive cycle budget"));
    }
    let mut steps = Vec::new();
    if ensure_incumbent(problem, rng).is_none() {
        return Ok(CooperativeRun { best: None, steps, ledger: None });
    }
    while !problem.is_exhausted() {
        let mut cycle_evals = 0;
        for (k, phase) in phases.iter_mut().enumerate() {
            if problem.is_exhausted() {
                break;
            }
            let (before, after, evaluations) =
                optimize_group(problem, &phase.group.indices, phase.optimizer.as_mut(), cycle_budget, rng)?;
            cycle_evals += evaluations;
            steps.push(GroupStep { group: k, optimizer: k, before, after, evaluations });
        }
        if cycle_evals == 0 {
            break;
        }
    }
    Ok(CooperativeRun { best: problem.best(), steps, ledger: None })
}

/// Makes fitness values positive for the contribution ratio.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shift(f64);

impl Shift {
    pub(crate) fn from_initial(f0: f64) -> Self {
        Shift(if f0 > 0.0 { 0.0 } else { 1.0 - f0 })
    }

    pub(crate) fn improvement(&mut self, before: f64, after: f64) -> f64 {
        if after + self.0 <= 0.0 {
            self.0 = 1.0 - before.min(after);
        }
        fitness_improvement(before + self.0, after + self.0).expect("shifted fitness is positive")
    }
}

/// Round-robin cooperative co-evolution with online optimizer selection.
///
/// On the first group every pool member runs once, chained from the current
/// incumbent with `group_budget` evaluations each. After that, each group
/// visit uses the optimizer with the largest accumulated contribution. Every
/// sub-run updates the ledger with the incumbent improvement it produced.
pub fn ccos_run(
    problem: &mut dyn Problem,
    groups: &[VariableGroup],
    pool: &mut [Box<dyn Optimizer>],
    group_budget: u64,
    rng: &mut RandomStream,
) -> Result<CooperativeRun> {
    if groups.is_empty() || pool.is_empty() || group_budget == 0 {
        return Err(invalid("ccos needs groups, a non-empty pool and a positive group budget"));
    }
    let ids: Vec<String> = pool.iter().map(|o| o.id().to_string()).collect();
    let mut ledger = ContributionLedger::new(&ids)?;
    let mut steps = Vec::new();
    let Some(initial) = ensure_incumbent(problem, rng) else {
        return Ok(CooperativeRun { best: None, steps, ledger: Some(ledger) });
    };
    let mut shift = Shift::from_initial(initial.f);
    let mut first = true;
    while !problem.is_exhausted() {
        let mut cycle_evals = 0;
        for (g, group) in groups.iter().enumerate() {
            if problem.is_exhausted() {
                break;
            }
            let chosen: Vec<usize> = if first { (0..pool.len()).collect() } else { vec![ledger.select()] };
            first = false;
            for k in chosen {
                let (before, after, evaluations) =
                    optimize_group(problem, &group.indices, pool[k].as_mut(), group_budget, rng)?;
                cycle_evals += evaluations;
                ledger.record_improvement(k, shift.improvement(before, after));
                steps.push(GroupStep { group: g, optimizer: k, before, after, evaluations });
            }
        }
        if cycle_evals == 0 {
            break;
        }
    }
    Ok(CooperativeRun { best: problem.best(), steps, ledger: Some(ledger) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks;
    use crate::domain::{Bounds, EvalBudget};
    use crate::optimizers::{build_optimizer, Identity, OptimizerParams};
    use crate::problem::{Evaluator, FnObjective};
    use approx::assert_abs_diff_eq;

    /// Adds a fixed step to the first coordinate of its group once per call.
    struct Stepper {
        id: &'static str,
        step: f64,
    }

    impl Optimizer for Stepper {
        fn id(&self) -> &str {
            self.id
        }

        fn optimize(&mut self, p: &mut dyn Problem, start: Option<&Candidate>, _: &mut RandomStream) -> Option<Candidate> {
            let s = start?;
            let mut x = s.x.clone();
            x[0] += self.step;
            let f = p.evaluate(&x)?;
            Some(if f > s.f { Candidate::new(x, f) } else { s.clone() })
        }
    }

    fn linear(dim: usize, budget: u64) -> Evaluator<FnObjective<impl Fn(&[f64]) -> f64 + Sync>> {
        Evaluator::new(FnObjective::new(Bounds::uniform(dim, 0.0, 1e9), |x: &[f64]| 10.0 + x.iter().sum::<f64>()), EvalBudget::new(budget))
    }

    #[test]
    fn ledger_follows_hand_iterated_contributions() {
        let mut ev = linear(2, 9);
        ev.evaluate(&[0.0, 0.0]);
        let mut pool: Vec<Box<dyn Optimizer>> =
            vec![Box::new(Stepper { id: "slpso", step: 1.0 }), Box::new(Stepper { id: "sansde", step: 2.0 })];
        let groups = VariableGroup::blocks(2, 1);
        let run = ccos_run(&mut ev, &groups, &mut pool, 5, &mut RandomStream::new(0, 0)).unwrap();

        // Replay: fitness starts at 10; each step adds its size.
        let mut f = 10.0;
        let mut u = [0.0f64; 2];
        let mut expected = Vec::new();
        let mut first = true;
        for _cycle in 0..4 {
            for _g in 0..2 {
                let chosen: Vec<usize> = if first { vec![0, 1] } else { vec![if u[1] > u[0] { 1 } else { 0 }] };
                first = false;
                for k in chosen {
                    let after = f + [1.0, 2.0][k];
                    let i = (after - f) / after;
                    u[k] = (u[k] + i) / 2.0;
                    expected.push((k, f, after));
                    f = after;
                }
            }
        }
        expected.truncate(8);
        let got: Vec<(usize, f64, f64)> = run.steps.iter().map(|s| (s.optimizer, s.before, s.after)).collect();
        assert_eq!(got, expected);
        assert!(run.steps[2..].iter().all(|s| s.optimizer == 1));
        let ledger = run.ledger.unwrap();
        let mut u = [0.0f64; 2];
        for &(k, b, a) in &expected {
            u[k] = (u[k] + (a - b) / a) / 2.0;
        }
        assert_abs_diff_eq!(ledger.accumulated(0), u[0], epsilon = 1e-12);
        assert_abs_diff_eq!(ledger.accumulated(1), u[1], epsilon = 1e-12);
    }

    #[test]
    fn group_steps_leave_other_dimensions_alone() {
        let mut ev = linear(4, 3);
        ev.evaluate(&[1.0, 2.0, 3.0, 4.0]);
        let mut stepper = Stepper { id: "s", step: 5.0 };
        optimize_group(&mut ev, &[2, 3], &mut stepper, 10, &mut RandomStream::new(0, 0)).unwrap();
        assert_eq!(ev.incumbent().unwrap().x, vec![1.0, 2.0, 8.0, 4.0]);
    }

    #[test]
    fn separable_sphere_matches_all_at_once_de() {
        let params = OptimizerParams::default();
        let budget = 20_000;
        let mut cc = Vec::new();
        let mut de = Vec::new();
        for seed in 0..5 {
            let mut ev = Evaluator::new(benchmarks::maximise(benchmarks::sphere, 8, -5.0, 5.0), EvalBudget::new(budget));
            let mut pool = vec![build_optimizer("de", &params).unwrap()];
            ccos_run(&mut ev, &VariableGroup::blocks(8, 2), &mut pool, 500, &mut RandomStream::new(seed, 0)).unwrap();
            cc.push(ev.incumbent().unwrap().fitness);
            let mut ev = Evaluator::new(benchmarks::maximise(benchmarks::sphere, 8, -5.0, 5.0), EvalBudget::new(budget));
            build_optimizer("de", &params).unwrap().optimize(&mut ev, None, &mut RandomStream::new(seed, 0));
            de.push(ev.incumbent().unwrap().fitness);
        }
        cc.sort_by(f64::total_cmp);
        de.sort_by(f64::total_cmp);
        assert!((cc[2] - de[2]).abs() < 1e-2, "cc {cc:?} de {de:?}");
    }

    #[test]
    fn frozen_phase_equals_single_phase() {
        let params = OptimizerParams::default();
        let run = |with_identity: bool| {
            let mut ev = Evaluator::new(benchmarks::maximise(benchmarks::sphere, 4, -5.0, 5.0), EvalBudget::new(2000));
            let mut phases = Vec::new();
            if with_identity {
                phases.push(Phase { group: VariableGroup::blocks(4, 2).remove(1), optimizer: Box::new(Identity) });
            }
            phases.push(Phase { group: VariableGroup::blocks(4, 2).remove(0), optimizer: build_optimizer("de", &params).unwrap() });
            alternating_schedule(&mut ev, &mut phases, 400, &mut RandomStream::new(8, 0)).unwrap();
            ev.trace().to_vec()
        };
        assert_eq!(run(true), run(false));
    }

    #[test]
    fn whole_budget_cycle_is_a_single_phase() {
        let params = OptimizerParams::default();
        let mut ev = Evaluator::new(benchmarks::maximise(benchmarks::sphere, 4, -5.0, 5.0), EvalBudget::new(1000));
        let mut phases = vec![
            Phase { group: VariableGroup::blocks(4, 2).remove(0), optimizer: build_optimizer("de", &params).unwrap() },
            Phase { group: VariableGroup::blocks(4, 2).remove(1), optimizer: build_optimizer("de", &params).unwrap() },
        ];
        let run = alternating_schedule(&mut ev, &mut phases, 1000, &mut RandomStream::new(8, 0)).unwrap();
        assert_eq!(run.steps.len(), 1);
        assert_eq!(run.steps[0].evaluations, 999);
    }

    #[test]
    fn incumbent_is_monotone_across_phases() {
        let params = OptimizerParams::default();
        let mut ev = Evaluator::new(benchmarks::maximise(benchmarks::rastrigin, 6, -5.12, 5.12), EvalBudget::new(3000));
        let mut pool = vec![build_optimizer("slpso", &params).unwrap(), build_optimizer("sansde", &params).unwrap()];
        let run = ccos_run(&mut ev, &VariableGroup::blocks(6, 2), &mut pool, 200, &mut RandomStream::new(2, 0)).unwrap();
        assert!(run.steps.windows(2).all(|w| w[1].before >= w[0].after && w[0].after >= w[0].before));
        assert_eq!(ev.used(), 3000);
    }

    #[test]
    fn shift_handles_negative_fitness() {
        let mut s = Shift::from_initial(-9.0);
        assert_abs_diff_eq!(s.improvement(-9.0, -4.0), 5.0 / 6.0, epsilon = 1e-15);
        let mut s = Shift::from_initial(5.0);
        assert_abs_diff_eq!(s.improvement(100.0, 125.0), 0.2, epsilon = 1e-15);
    }
}
