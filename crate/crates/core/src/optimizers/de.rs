use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_population, distinct_indices, Optimizer, OptimizerState, Population};
use crate::domain::RandomStream;
use crate::error::Result;
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeParams {
    pub population: usize,
    /// Differential weight F.
    pub weight: f64,
    /// Crossover probability.
    pub crossover: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams { population: 50, weight: 0.5, crossover: 0.5 }
    }
}

/// Binomial crossover: each gene comes from the mutant with probability
/// `cr`, and gene `jrand` always does.
pub(crate) fn binomial(target: &[f64], mutant: &[f64], cr: f64, rng: &mut RandomStream) -> Vec<f64> {
    let jrand = rng.random_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &m))| if j == jrand || rng.random::<f64>() < cr { m } else { t })
        .collect()
}

/// Writes trials back where they are at least as good as their targets.
pub(crate) fn greedy_replace(state: &mut OptimizerState, trials: Vec<Vec<f64>>, values: &[f64]) -> Vec<bool> {
    trials
        .into_iter()
        .zip(values)
        .enumerate()
        .map(|(i, (trial, &f))| {
            let better = f >= state.fs[i];
            if better {
                state.xs[i] = trial;
                state.fs[i] = f;
            }
            better
        })
        .collect()
}

/// One generation of DE/rand/1/bin with greedy replacement. Returns false
/// when the budget ran out during the generation.
pub fn de_step(state: &mut OptimizerState, params: &DeParams, problem: &mut dyn Problem, rng: &mut RandomStream) -> bool {
    let n = state.len();
    let bounds = problem.bounds().clone();
    let trials: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let r = distinct_indices(rng, n, i, 3);
            let (a, b, c) = (&state.xs[r[0]], &state.xs[r[1]], &state.xs[r[2]]);
            let mutant: Vec<f64> = (0..a.len()).map(|j| a[j] + params.weight * (b[j] - c[j])).collect();
            let mut trial = binomial(&state.xs[i], &mutant, params.crossover, rng);
            bounds.clamp(&mut trial);
            trial
        })
        .collect();
    let values = state.evaluate(problem, &trials);
    let complete = values.len() == n;
    greedy_replace(state, trials, &values);
    state.iteration += 1;
    complete
}

/// Differential evolution, rand/1/bin.
#[derive(Debug, Clone)]
pub struct De {
    params: DeParams,
}

impl De {
    pub fn new(params: DeParams) -> Result<Self> {
        check_population(params.population, 4, "de")?;
        Ok(De { params })
    }
}

impl Optimizer for De {
    fn id(&self) -> &str {
        "de"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let Some(mut state) = OptimizerState::initialize(problem, self.params.population, start, rng) else {
            return start.cloned();
        };
        while state.len() >= 4 && de_step(&mut state, &self.params, problem, rng) {}
        Some(state.best)
    }

    fn optimize_population(
        &mut self,
        problem: &mut dyn Problem,
        population: &mut Population,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let mut state = OptimizerState::resume(problem, population, self.params.population, rng)?;
        while state.len() >= 4 && de_step(&mut state, &self.params, problem, rng) {}
        *population = Population::from(&state);
        Some(state.best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::testing::sphere;

    #[test]
    fn identical_population_is_unchanged() {
        let mut ev = sphere(3, 100);
        let x = vec![1.0, -2.0, 0.5];
        let mut state = OptimizerState::initialize(&mut ev, 6, None, &mut RandomStream::new(0, 0)).unwrap();
        state.xs = vec![x.clone(); 6];
        state.fs = vec![-5.25; 6];
        de_step(&mut state, &DeParams::default(), &mut ev, &mut RandomStream::new(1, 0));
        assert!(state.xs.iter().all(|y| *y == x));
    }

    #[test]
    fn best_never_decreases() {
        let mut ev = sphere(5, 3000);
        let mut rng = RandomStream::new(2, 0);
        let mut state = OptimizerState::initialize(&mut ev, 20, None, &mut rng).unwrap();
        let initial = state.best.f;
        let mut last = initial;
        while de_step(&mut state, &DeParams::default(), &mut ev, &mut rng) {
            let best = state.fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(best >= last);
            last = best;
        }
        assert!(state.best.f > initial);
    }

    #[test]
    fn improves_on_sphere() {
        let mut ev = sphere(5, 2000);
        let mut rng = RandomStream::new(3, 0);
        let first = {
            let mut probe = sphere(5, 50);
            OptimizerState::initialize(&mut probe, 50, None, &mut RandomStream::new(3, 0)).unwrap().best.f
        };
        let best = De::new(DeParams::default()).unwrap().optimize(&mut ev, None, &mut rng).unwrap();
        assert!(best.f > first);
    }

    #[test]
    fn rejects_tiny_population() {
        assert!(De::new(DeParams { population: 3, ..DeParams::default() }).is_err());
    }
}
