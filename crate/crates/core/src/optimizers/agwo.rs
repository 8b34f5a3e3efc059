use serde::{Deserialize, Serialize};

use super::chaos::{ChaoticMap, ChaoticSequence};
use super::gwo::Pack;
use super::{check_population, Optimizer, OptimizerState, Population};
use crate::domain::RandomStream;
use crate::error::{invalid, Result};
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgwoParams {
    pub population: usize,
    pub cn_max: f64,
    pub cn_min: f64,
    /// Initial chaotic state.
    pub cf_init: f64,
    /// Stagnation window in iterations.
    pub rho: usize,
    pub max_iter_n: usize,
    pub max_iter_c: usize,
    /// Lower limit of the decay period after repeated halving.
    pub min_iter_c: usize,
    pub chaotic_map: ChaoticMap,
}

impl Default for AgwoParams {
    fn default() -> Self {
        AgwoParams {
            population: 50,
            cn_max: 0.3,
            cn_min: 1e-6,
            cf_init: 0.7,
            rho: 10,
            max_iter_n: 50,
            max_iter_c: 50,
            min_iter_c: 10,
            chaotic_map: ChaoticMap::Singer,
        }
    }
}

impl AgwoParams {
    pub fn validate(&self) -> Result<()> {
        check_population(self.population, 3, "agwo")?;
        if !(self.cn_min < self.cn_max) {
            return Err(invalid("agwo needs cn_min < cn_max"));
        }
        if self.rho == 0 || self.max_iter_n == 0 || self.max_iter_c == 0 || self.min_iter_c == 0 {
            return Err(invalid("agwo periods must be positive"));
        }
        ChaoticSequence::new(self.chaotic_map, self.cf_init).map(|_| ())
    }
}

/// Normalisation `N_m`, falling linearly from `cn_max` to `cn_min` over
/// `max_iter_n` iterations.
pub fn agwo_normalization(iter_n: usize, params: &AgwoParams) -> f64 {
    params.cn_max - (params.cn_max - params.cn_min) / params.max_iter_n as f64 * iter_n as f64
}

/// Quadratically decaying control parameter plus the chaotic term `cc`.
pub fn agwo_control_a(iter_c: usize, max_iter_c: usize, cn_max: f64, cc: f64) -> f64 {
    let span = 2.0 - cn_max;
    let t = iter_c as f64;
    let m = max_iter_c as f64;
    span - t * t * span / (m * m) + cc
}

/// Adaptive control state of AGWO.
#[derive(Debug, Clone)]
pub struct AgwoControl {
    params: AgwoParams,
    chaos: ChaoticSequence,
    pub a: f64,
    pub iter_n: usize,
    pub iter_c: usize,
    pub max_iter_c: usize,
    pub resets: usize,
}

impl AgwoControl {
    /// Starts in the reset state: `a = 2`, `iter_n = iter_c = 1`.
    pub fn new(params: AgwoParams) -> Result<Self> {
        params.validate()?;
        let chaos = ChaoticSequence::new(params.chaotic_map, params.cf_init)?;
        Ok(AgwoControl { a: 2.0, iter_n: 1, iter_c: 1, max_iter_c: params.max_iter_c, resets: 0, chaos, params })
    }

    pub fn params(&self) -> &AgwoParams {
        &self.params
    }

    fn reset(&mut self) {
        self.a = 2.0;
        self.iter_n = 1;
        self.iter_c = 1;
        self.max_iter_c = (self.max_iter_c / 2).max(self.params.min_iter_c);
        self.chaos.reset();
        self.resets += 1;
    }

    /// Applies the end-of-iteration rule after `iteration` (1-based) update
    /// rounds and returns the control value for the next round.
    ///
    /// `window_best` is the best fitness found during the current window of
    /// `rho` iterations and `alpha_fitness` the alpha at its start. At the end
    /// of a window that did not beat the alpha, the control resets with a
    /// shorter decay period. Otherwise the chaotic schedule advances.
    pub fn advance(&mut self, iteration: usize, window_best: f64, alpha_fitness: f64) -> f64 {
        if iteration % self.params.rho == 0 && window_best <= alpha_fitness {
            self.reset();
            return self.a;
        }
        let cf = self.chaos.next_value().abs();
        let n_m = agwo_normalization(self.iter_n, &self.params);
        self.a = agwo_control_a(self.iter_c, self.max_iter_c, self.params.cn_max, n_m * cf);
        self.iter_n = if self.iter_n >= self.params.max_iter_n { 1 } else { self.iter_n + 1 };
        self.iter_c = (self.iter_c + 1).min(self.max_iter_c);
        self.a
    }
}

/// Adaptive grey wolf optimizer with chaotic, stagnation-resetting control.
#[derive(Debug, Clone)]
pub struct Agwo {
    params: AgwoParams,
    a_trace: Vec<f64>,
    resets: usize,
}

impl Agwo {
    pub fn new(params: AgwoParams) -> Result<Self> {
        params.validate()?;
        Ok(Agwo { params, a_trace: Vec::new(), resets: 0 })
    }

    /// Control parameter used at each iteration of the last run.
    pub fn a_trace(&self) -> &[f64] {
        &self.a_trace
    }

    pub fn resets(&self) -> usize {
        self.resets
    }

    fn run(&mut self, problem: &mut dyn Problem, state: OptimizerState, rng: &mut RandomStream) -> Pack {
        self.a_trace.clear();
        let mut control = AgwoControl::new(self.params.clone()).expect("validated on construction");
        let mut pack = Pack::new(state);
        let mut iteration = 0;
        let mut window_start = pack.alpha().f;
        while !problem.is_exhausted() {
            self.a_trace.push(control.a);
            if pack.step(problem, control.a, rng).is_none() {
                break;
            }
            iteration += 1;
            control.advance(iteration, pack.alpha().f, window_start);
            if iteration % self.params.rho == 0 {
                window_start = pack.alpha().f;
            }
        }
        self.resets = control.resets;
        pack
    }
}

impl Optimizer for Agwo {
    fn id(&self) -> &str {
        "agwo"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let Some(state) = OptimizerState::initialize(problem, self.params.population, start, rng) else {
            return start.cloned();
        };
        Some(self.run(problem, state, rng).alpha().clone())
    }

    fn optimize_population(
        &mut self,
        problem: &mut dyn Problem,
        population: &mut Population,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let state = OptimizerState::resume(problem, population, self.params.population, rng)?;
        let pack = self.run(problem, state, rng);
        *population = Population::from(&pack.state);
        Some(pack.alpha().clone())
    }
}
