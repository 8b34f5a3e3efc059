//! All-at-once optimizers behind a common [`Optimizer`] interface.
//!
//! Every optimizer maximises through a [`Problem`] and runs until the problem
//! reports no remaining budget or its own stopping rule fires. Evaluations of
//! one generation are issued as a single batch.

pub mod agwo;
pub mod chaos;
pub mod de;
pub mod ea;
pub mod gwo;
pub mod nelder_mead;
pub mod pso;
pub mod sansde;
pub mod slpso;

use serde::{Deserialize, Serialize};

use crate::domain::RandomStream;
use crate::error::{Error, Result};
use crate::problem::{Candidate, Problem};

pub use agwo::{agwo_control_a, agwo_normalization, Agwo, AgwoControl, AgwoParams};
pub use chaos::{chaotic_next, ChaoticMap};
pub use de::{de_step, De, DeParams};
pub use ea::{one_plus_one_ea_step, EaParams, OnePlusOneEa};
pub use gwo::{gwo_control_a, gwo_move, gwo_update, Gwo, GwoParams};
pub use nelder_mead::{nelder_mead, NelderMead, NmParams};
pub use pso::{pso_step, Pso, PsoParams};
pub use sansde::{sansde_step, Sansde, SansdeParams};
pub use slpso::{slpso_step, Slpso, SlpsoParams};

/// Stable identifiers of the built-in optimizers.
pub const OPTIMIZER_IDS: [&str; 8] = ["de", "pso", "nm", "ea1p1", "gwo", "agwo", "slpso", "sansde"];

/// A black-box maximiser.
pub trait Optimizer: Send {
    fn id(&self) -> &str;

    /// Searches `problem` until its budget runs out or the optimizer stops on
    /// its own. `start`, when given, is an already evaluated point that seeds
    /// the search without being re-evaluated. Returns the best point seen,
    /// or `None` if nothing was evaluated and no start was given.
    fn optimize(&mut self, problem: &mut dyn Problem, start: Option<&Candidate>, rng: &mut RandomStream)
        -> Option<Candidate>;

    /// Continues from a shared population whose fitness values are valid for
    /// `problem` and leaves the final population in its place. Without a
    /// population of its own, an optimizer starts from the best member and
    /// merges its result back in.
    fn optimize_population(
        &mut self,
        problem: &mut dyn Problem,
        population: &mut Population,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let start = population.best();
        let found = self.optimize(problem, start.as_ref(), rng);
        if let Some(c) = &found {
            population.merge(c.clone());
        }
        found
    }
}

/// Evaluated points handed from one optimizer run to the next.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Population {
    pub xs: Vec<Vec<f64>>,
    pub fs: Vec<f64>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn best(&self) -> Option<Candidate> {
        (!self.is_empty()).then(|| {
            let i = argmax(&self.fs);
            Candidate::new(self.xs[i].clone(), self.fs[i])
        })
    }

    /// Adds `c` unless already present; the worst member makes room once
    /// the population is non-empty and `c` beats it.
    pub fn merge(&mut self, c: Candidate) {
        if self.xs.contains(&c.x) {
            return;
        }
        if self.is_empty() {
            self.xs.push(c.x);
            self.fs.push(c.f);
            return;
        }
        let worst = (0..self.len()).min_by(|&a, &b| self.fs[a].total_cmp(&self.fs[b])).expect("non-empty");
        if c.f > self.fs[worst] {
            self.xs[worst] = c.x;
            self.fs[worst] = c.f;
        }
    }
}

impl From<&OptimizerState> for Population {
    fn from(s: &OptimizerState) -> Self {
        Population { xs: s.xs.clone(), fs: s.fs.clone() }
    }
}

/// Hyper-parameters of every built-in optimizer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerParams {
    pub de: DeParams,
    pub pso: PsoParams,
    pub nm: NmParams,
    pub ea1p1: EaParams,
    pub gwo: GwoParams,
    pub agwo: AgwoParams,
    pub slpso: SlpsoParams,
    pub sansde: SansdeParams,
}

/// Builds an optimizer from its identifier.
pub fn build_optimizer(id: &str, params: &OptimizerParams) -> Result<Box<dyn Optimizer>> {
    Ok(match id {
        "de" => Box::new(De::new(params.de.clone())?),
        "pso" => Box::new(Pso::new(params.pso.clone())?),
        "nm" => Box::new(NelderMead::new(params.nm.clone())),
        "ea1p1" => Box::new(OnePlusOneEa::new(params.ea1p1.clone())),
        "gwo" => Box::new(Gwo::new(params.gwo.clone())?),
        "agwo" => Box::new(Agwo::new(params.agwo.clone())?),
        "slpso" => Box::new(Slpso::new(params.slpso.clone())?),
        "sansde" => Box::new(Sansde::new(params.sansde.clone())?),
        "identity" => Box::new(Identity),
        other => return Err(Error::Config(format!("unknown optimizer '{other}', expected one of {OPTIMIZER_IDS:?}"))),
    })
}

/// Returns the start point unchanged without evaluating anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Optimizer for Identity {
    fn id(&self) -> &str {
        "identity"
    }

    fn optimize(&mut self, _: &mut dyn Problem, start: Option<&Candidate>, _: &mut RandomStream) -> Option<Candidate> {
        start.cloned()
    }
}

/// Population with cached fitness and running best.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub xs: Vec<Vec<f64>>,
    pub fs: Vec<f64>,
    pub best: Candidate,
    pub iteration: usize,
    pub evals_used: u64,
}

impl OptimizerState {
    /// Samples `size` points uniformly, the first replaced by `start` when
    /// given, and evaluates the sampled ones. The population is truncated to
    /// the evaluated points if the budget runs out.
    pub fn initialize(
        problem: &mut dyn Problem,
        size: usize,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Self> {
        let bounds = problem.bounds().clone();
        let n_sampled = size - usize::from(start.is_some());
        let sampled: Vec<Vec<f64>> = (0..n_sampled).map(|_| bounds.sample(rng)).collect();
        let values = problem.evaluate_batch(&sampled);
        let mut xs = Vec::with_capacity(size);
        let mut fs = Vec::with_capacity(size);
        if let Some(s) = start {
            xs.push(s.x.clone());
            fs.push(s.f);
        }
        let evaluated = values.len();
        xs.extend(sampled.into_iter().take(evaluated));
        fs.extend(values);
        if xs.is_empty() {
            return None;
        }
        let best = argmax(&fs);
        Some(OptimizerState {
            best: Candidate::new(xs[best].clone(), fs[best]),
            xs,
            fs,
            iteration: 0,
            evals_used: evaluated as u64,
        })
    }

    /// Resumes from the best `size` members of `population`, sampling and
    /// evaluating uniform points if it is smaller.
    pub fn resume(
        problem: &mut dyn Problem,
        population: &Population,
        size: usize,
        rng: &mut RandomStream,
    ) -> Option<Self> {
        if population.is_empty() {
            return Self::initialize(problem, size, None, rng);
        }
        let mut idx: Vec<usize> = (0..population.len()).collect();
        idx.sort_by(|&a, &b| population.fs[b].total_cmp(&population.fs[a]));
        idx.truncate(size);
        let mut xs: Vec<Vec<f64>> = idx.iter().map(|&i| population.xs[i].clone()).collect();
        let mut fs: Vec<f64> = idx.iter().map(|&i| population.fs[i]).collect();
        let bounds = problem.bounds().clone();
        let sampled: Vec<Vec<f64>> = (xs.len()..size).map(|_| bounds.sample(rng)).collect();
        let values = problem.evaluate_batch(&sampled);
        let evaluated = values.len();
        xs.extend(sampled.into_iter().take(evaluated));
        fs.extend(values);
        Some(OptimizerState {
            best: Candidate::new(xs[0].clone(), fs[0]),
            xs,
            fs,
            iteration: 0,
            evals_used: evaluated as u64,
        })
    }

    /// A single-member state around an evaluated point.
    pub fn from_candidate(c: Candidate) -> Self {
        OptimizerState { xs: vec![c.x.clone()], fs: vec![c.f], best: c, iteration: 0, evals_used: 0 }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Evaluates a batch, updating the evaluation count and the best point.
    /// The returned vector is shorter than `xs` when the budget ran out.
    pub fn evaluate(&mut self, problem: &mut dyn Problem, xs: &[Vec<f64>]) -> Vec<f64> {
        let values = problem.evaluate_batch(xs);
        self.evals_used += values.len() as u64;
        for (x, &f) in xs.iter().zip(&values) {
            self.observe(x, f);
        }
        values
    }

    pub fn observe(&mut self, x: &[f64], f: f64) {
        if f > self.best.f {
            self.best = Candidate::new(x.to_vec(), f);
        }
    }

    /// Indices sorted from best to worst.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fs[b].total_cmp(&self.fs[a]));
        idx
    }
}

/// Index of the largest value; the first on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Generations that fit in the remaining budget with `size` evaluations each.
pub(crate) fn generations(remaining: u64, size: usize) -> usize {
    remaining.div_ceil(size.max(1) as u64).min(usize::MAX as u64) as usize
}

pub(crate) fn check_population(mu: usize, min: usize, id: &str) -> Result<()> {
    if mu < min {
        return Err(crate::error::invalid(format!("{id} needs a population of at least {min}, got {mu}")));
    }
    Ok(())
}

/// Picks `n` distinct indices below `len`, all different from `exclude`.
pub(crate) fn distinct_indices(rng: &mut RandomStream, len: usize, exclude: usize, n: usize) -> Vec<usize> {
    use rand::Rng;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = rng.random_range(0..len);
        if r != exclude && !out.contains(&r) {
            out.push(r);
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Bounds, EvalBudget};
    use crate::problem::{Evaluator, FnObjective};

    #[test]
    fn registry_knows_every_id() {
        let params = OptimizerParams::default();
        for id in OPTIMIZER_IDS {
            assert_eq!(build_optimizer(id, &params).unwrap().id(), id);
        }
        assert!(build_optimizer("cmaes", &params).is_err());
    }

    #[test]
    fn every_optimizer_spends_exactly_the_budget_and_stays_in_bounds() {
        let params = OptimizerParams::default();
        for id in OPTIMIZER_IDS {
            if id == "nm" {
                continue;
            }
            let bounds = Bounds::uniform(6, -2.0, 3.0);
            let check = bounds.clone();
            let objective = FnObjective::new(bounds, move |x: &[f64]| {
                assert!(check.contains(x), "out of bounds point {x:?}");
                -x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>()
            });
            let budget = EvalBudget::new(777);
            let mut ev = Evaluator::new(objective, budget.clone());
            let mut opt = build_optimizer(id, &params).unwrap();
            let best = opt.optimize(&mut ev, None, &mut RandomStream::new(3, 0)).unwrap();
            assert_eq!(budget.consumed(), 777, "{id}");
            assert_eq!(best.f, ev.incumbent().unwrap().fitness, "{id}");
        }
    }

    #[test]
    fn every_optimizer_is_seed_deterministic() {
        let params = OptimizerParams::default();
        for id in OPTIMIZER_IDS {
            let run = || {
                let mut ev = testing::sphere(5, 600);
                build_optimizer(id, &params).unwrap().optimize(&mut ev, None, &mut RandomStream::new(11, 2));
                ev.trace().to_vec()
            };
            assert_eq!(run(), run(), "{id}");
        }
    }

    #[test]
    fn start_is_never_lost() {
        let params = OptimizerParams::default();
        for id in OPTIMIZER_IDS {
            let mut ev = testing::sphere(4, 200);
            let start = Candidate::new(vec![0.0; 4], 0.0);
            let best = build_optimizer(id, &params).unwrap().optimize(&mut ev, Some(&start), &mut RandomStream::new(1, 0));
            assert_eq!(best.unwrap().f, 0.0, "{id}");
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        let params = OptimizerParams::default();
        for id in OPTIMIZER_IDS {
            let mut ev = testing::sphere(3, 0);
            let start = Candidate::new(vec![1.0; 3], -3.0);
            let mut opt = build_optimizer(id, &params).unwrap();
            assert_eq!(opt.optimize(&mut ev, Some(&start), &mut RandomStream::new(1, 0)), Some(start.clone()));
            assert_eq!(opt.optimize(&mut ev, None, &mut RandomStream::new(1, 0)), None);
        }
    }

    #[test]
    fn identity_does_not_evaluate() {
        let mut ev = testing::sphere(3, 10);
        let start = Candidate::new(vec![1.0; 3], -3.0);
        assert_eq!(Identity.optimize(&mut ev, Some(&start), &mut RandomStream::new(0, 0)), Some(start));
        assert_eq!(ev.used(), 0);
    }
}
