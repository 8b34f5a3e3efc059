use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::de::{binomial, greedy_replace};
use super::{check_population, distinct_indices, Optimizer, OptimizerState, Population};
use crate::domain::RandomStream;
use crate::error::Result;
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SansdeParams {
    pub population: usize,
    /// Generations between updates of the strategy and F-distribution
    /// probabilities.
    pub learning_period: usize,
    /// Generations between redraws of the per-individual CR values.
    pub cr_redraw_period: usize,
    /// Generations between updates of the CR mean.
    pub cr_update_period: usize,
    pub initial_probability: f64,
    pub initial_cr_mean: f64,
}

impl Default for SansdeParams {
    fn default() -> Self {
        SansdeParams {
            population: 50,
            learning_period: 20,
            cr_redraw_period: 5,
            cr_update_period: 25,
            initial_probability: 0.5,
            initial_cr_mean: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    success_a: u64,
    failure_a: u64,
    success_b: u64,
    failure_b: u64,
}

impl Tally {
    fn record(&mut self, first: bool, success: bool) {
        match (first, success) {
            (true, true) => self.success_a += 1,
            (true, false) => self.failure_a += 1,
            (false, true) => self.success_b += 1,
            (false, false) => self.failure_b += 1,
        }
    }

    /// Success-rate weighted probability of the first option; `None` when
    /// there is no success to learn from.
    fn probability(&self) -> Option<f64> {
        let (s1, f1, s2, f2) =
            (self.success_a as f64, self.failure_a as f64, self.success_b as f64, self.failure_b as f64);
        let num = s1 * (s2 + f2);
        let den = s2 * (s1 + f1) + num;
        (den > 0.0).then(|| num / den)
    }
}

/// Self-adaptive control state.
#[derive(Debug, Clone)]
pub struct SansdeState {
    pub population: OptimizerState,
    /// Probability of the rand/1 strategy over current-to-best/1.
    pub strategy_probability: f64,
    /// Probability of drawing F from the Gaussian rather than the Cauchy.
    pub gaussian_probability: f64,
    pub cr_mean: f64,
    crs: Vec<f64>,
    cr_records: Vec<(f64, f64)>,
    strategy_tally: Tally,
    f_tally: Tally,
}

impl SansdeState {
    pub fn new(population: OptimizerState, params: &SansdeParams) -> Self {
        let n = population.len();
        SansdeState {
            population,
            strategy_probability: params.initial_probability,
            gaussian_probability: params.initial_probability,
            cr_mean: params.initial_cr_mean,
            crs: vec![params.initial_cr_mean; n],
            cr_records: Vec::new(),
            strategy_tally: Tally::default(),
            f_tally: Tally::default(),
        }
    }
}

/// One SaNSDE generation. Returns false when the budget ran out.
pub fn sansde_step(s: &mut SansdeState, params: &SansdeParams, problem: &mut dyn Problem, rng: &mut RandomStream) -> bool {
    let bounds = problem.bounds().clone();
    let pop = &s.population;
    let n = pop.len();
    let gen = pop.iteration;
    if gen % params.cr_redraw_period == 0 {
        let normal = Normal::new(s.cr_mean, 0.1).expect("valid CR distribution");
        s.crs = (0..n).map(|_| normal.sample(rng).clamp(0.0, 1.0)).collect();
    }
    let gauss = Normal::new(0.5, 0.3).expect("valid F distribution");
    let cauchy = Cauchy::new(0.0, 1.0).expect("valid F distribution");
    let best = &pop.xs[super::argmax(&pop.fs)];

    let mut choices = Vec::with_capacity(n);
    let trials: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let rand_one = rng.random::<f64>() < s.strategy_probability;
            let gaussian = rng.random::<f64>() < s.gaussian_probability;
            let f = if gaussian { gauss.sample(rng) } else { cauchy.sample(rng) };
            choices.push((rand_one, gaussian));
            let r = distinct_indices(rng, n, i, 3);
            let x = &pop.xs[i];
            let mutant: Vec<f64> = (0..x.len())
                .map(|j| {
                    if rand_one {
                        pop.xs[r[0]][j] + f * (pop.xs[r[1]][j] - pop.xs[r[2]][j])
                    } else {
                        x[j] + f * (best[j] - x[j]) + f * (pop.xs[r[0]][j] - pop.xs[r[1]][j])
                    }
                })
                .collect();
            let mut trial = binomial(x, &mutant, s.crs[i], rng);
            bounds.clamp(&mut trial);
            trial
        })
        .collect();
    let before = s.population.fs.clone();
    let values = s.population.evaluate(problem, &trials);
    let complete = values.len() == n;
    let accepted = greedy_replace(&mut s.population, trials, &values);
    for (i, &ok) in accepted.iter().enumerate() {
        let (rand_one, gaussian) = choices[i];
        let improved = ok && values[i] > before[i];
        s.strategy_tally.record(rand_one, improved);
        s.f_tally.record(gaussian, improved);
        if improved {
            s.cr_records.push((s.crs[i], values[i] - before[i]));
        }
    }
    s.population.iteration += 1;
    let gen = s.population.iteration;
    if gen % params.learning_period == 0 {
        if let Some(p) = s.strategy_tally.probability() {
            s.strategy_probability = p;
        }
        if let Some(p) = s.f_tally.probability() {
            s.gaussian_probability = p;
        }
        s.strategy_tally = Tally::default();
        s.f_tally = Tally::default();
    }
    if gen % params.cr_update_period == 0 {
        let total: f64 = s.cr_records.iter().map(|r| r.1).sum();
        if total > 0.0 && total.is_finite() {
            s.cr_mean = s.cr_records.iter().map(|(cr, w)| cr * w).sum::<f64>() / total;
        }
        s.cr_records.clear();
    }
    complete
}

/// Self-adaptive differential evolution with neighbourhood search.
#[derive(Debug, Clone)]
pub struct Sansde {
    params: SansdeParams,
}

impl Sansde {
    pub fn new(params: SansdeParams) -> Result<Self> {
        check_population(params.population, 4, "sansde")?;
        if params.learning_period == 0 || params.cr_redraw_period == 0 || params.cr_update_period == 0 {
            return Err(crate::error::invalid("sansde periods must be positive"));
        }
        Ok(Sansde { params })
    }
}

impl Optimizer for Sansde {
    fn id(&self) -> &str {
        "sansde"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let pop = OptimizerState::initialize(problem, self.params.population, start, rng)?;
        let mut state = SansdeState::new(pop, &self.params);
        while state.population.len() >= 4 && sansde_step(&mut state, &self.params, problem, rng) {}
        Some(state.population.best)
    }

    fn optimize_population(
        &mut self,
        problem: &mut dyn Problem,
        population: &mut Population,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let pop = OptimizerState::resume(problem, population, self.params.population, rng)?;
        let mut state = SansdeState::new(pop, &self.params);
        while state.population.len() >= 4 && sansde_step(&mut state, &self.params, problem, rng) {}
        *population = Population::from(&state.population);
        Some(state.population.best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::rastrigin;
    use crate::domain::{Bounds, EvalBudget};
    use crate::problem::{Evaluator, FnObjective};

    #[test]
    fn no_success_keeps_initial_probabilities() {
        let objective = FnObjective::new(Bounds::uniform(3, -1.0, 1.0), |_: &[f64]| 0.0);
        let mut ev = Evaluator::new(objective, EvalBudget::new(10_000));
        let mut rng = RandomStream::new(0, 0);
        let params = SansdeParams::default();
        let pop = OptimizerState::initialize(&mut ev, 20, None, &mut rng).unwrap();
        let mut s = SansdeState::new(pop, &params);
        for _ in 0..60 {
            sansde_step(&mut s, &params, &mut ev, &mut rng);
        }
        assert_eq!(s.strategy_probability, 0.5);
        assert_eq!(s.gaussian_probability, 0.5);
        assert_eq!(s.cr_mean, 0.5);
    }

    #[test]
    fn tally_formula() {
        let t = Tally { success_a: 3, failure_a: 7, success_b: 1, failure_b: 9 };
        // 3 * 10 / (1 * 10 + 3 * 10)
        assert_eq!(t.probability(), Some(0.75));
        assert_eq!(Tally::default().probability(), None);
    }

    #[test]
    fn improves_rastrigin() {
        let mut gains = Vec::new();
        for seed in 0..10 {
            let objective = FnObjective::new(Bounds::uniform(10, -5.12, 5.12), |x: &[f64]| -rastrigin(x));
            let mut ev = Evaluator::new(objective, EvalBudget::new(10_000));
            let best = Sansde::new(SansdeParams::default())
                .unwrap()
                .optimize(&mut ev, None, &mut RandomStream::new(seed, 0))
                .unwrap();
            let initial = ev.trace()[0].best_fitness;
            let first_round_best = ev
                .trace()
                .iter()
                .take_while(|p| p.evals <= 50)
                .last()
                .map_or(initial, |p| p.best_fitness);
            gains.push((first_round_best - best.f) / first_round_best);
        }
        gains.sort_by(f64::total_cmp);
        assert!(gains[5] >= 0.5, "{gains:?}");
    }
}
