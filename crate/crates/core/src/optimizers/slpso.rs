use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_population, Optimizer, OptimizerState, Population};
use crate::domain::RandomStream;
use crate::error::Result;
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlpsoParams {
    pub population: usize,
    /// Exponent scale of the learning probability.
    pub alpha: f64,
    /// Social influence scale.
    pub beta: f64,
    /// Reference swarm size used in the dimension-dependent terms.
    pub base_size: usize,
}

impl Default for SlpsoParams {
    fn default() -> Self {
        SlpsoParams { population: 50, alpha: 0.5, beta: 0.01, base_size: 100 }
    }
}

/// Swarm state with per-particle behaviour vectors.
#[derive(Debug, Clone)]
pub struct SocialSwarm {
    pub state: OptimizerState,
    pub delta: Vec<Vec<f64>>,
}

impl SocialSwarm {
    pub fn new(state: OptimizerState) -> Self {
        let delta = vec![vec![0.0; state.xs[0].len()]; state.len()];
        SocialSwarm { state, delta }
    }
}

/// One social-learning generation. Particles are ranked by fitness; every
/// particle except the best learns, per dimension, from a random better
/// demonstrator and from the swarm mean, with a learning probability that
/// falls with rank. Returns false when the budget ran out.
pub fn slpso_step(swarm: &mut SocialSwarm, params: &SlpsoParams, problem: &mut dyn Problem, rng: &mut RandomStream) -> bool {
    let bounds = problem.bounds().clone();
    let m = swarm.state.len();
    let n = bounds.dim();
    let scale = (n as f64 / params.base_size as f64).ceil().max(1.0);
    let exponent = params.alpha * scale.ln();
    let epsilon = params.beta * n as f64 / params.base_size as f64;
    let mean: Vec<f64> = (0..n).map(|j| swarm.state.xs.iter().map(|x| x[j]).sum::<f64>() / m as f64).collect();

    // Worst first: position r in `order` has r better particles after it.
    let mut order = swarm.state.ranking();
    order.reverse();
    let old = swarm.state.xs.clone();
    let mut moved = Vec::with_capacity(m.saturating_sub(1));
    for r in 0..m.saturating_sub(1) {
        let i = order[r];
        let learn_prob = (1.0 - r as f64 / m as f64).powf(exponent);
        if rng.random::<f64>() < learn_prob {
            for j in 0..n {
                let k = order[rng.random_range(r + 1..m)];
                let (r1, r2, r3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
                let d = &mut swarm.delta[i][j];
                *d = r1 * *d + r2 * (old[k][j] - old[i][j]) + r3 * epsilon * (mean[j] - old[i][j]);
                swarm.state.xs[i][j] = old[i][j] + *d;
            }
            bounds.clamp(&mut swarm.state.xs[i]);
        }
        moved.push(i);
    }
    let batch: Vec<Vec<f64>> = moved.iter().map(|&i| swarm.state.xs[i].clone()).collect();
    let values = swarm.state.evaluate(problem, &batch);
    for (&i, &f) in moved.iter().zip(&values) {
        swarm.state.fs[i] = f;
    }
    for &i in &moved[values.len()..] {
        swarm.state.xs[i] = old[i].clone();
    }
    swarm.state.iteration += 1;
    values.len() == moved.len()
}

/// Social learning particle swarm optimizer.
#[derive(Debug, Clone)]
pub struct Slpso {
    params: SlpsoParams,
}

impl Slpso {
    pub fn new(params: SlpsoParams) -> Result<Self> {
        check_population(params.population, 2, "slpso")?;
        Ok(Slpso { params })
    }
}

impl Optimizer for Slpso {
    fn id(&self) -> &str {
        "slpso"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let state = OptimizerState::initialize(problem, self.params.population, start, rng)?;
        let mut swarm = SocialSwarm::new(state);
        while swarm.state.len() >= 2 && slpso_step(&mut swarm, &self.params, problem, rng) {}
        Some(swarm.state.best)
    }

    fn optimize_population(
        &mut self,
        problem: &mut dyn Problem,
        population: &mut Population,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let state = OptimizerState::resume(problem, population, self.params.population, rng)?;
        let mut swarm = SocialSwarm::new(state);
        while swarm.state.len() >= 2 && slpso_step(&mut swarm, &self.params, problem, rng) {}
        *population = Population::from(&swarm.state);
        Some(swarm.state.best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::testing::sphere;

    #[test]
    fn identical_particles_do_not_move() {
        let mut ev = sphere(3, 1000);
        let mut state = OptimizerState::initialize(&mut ev, 8, None, &mut RandomStream::new(0, 0)).unwrap();
        let x = vec![0.3, -0.2, 1.0];
        state.xs = vec![x.clone(); 8];
        state.fs = vec![-1.13; 8];
        let mut swarm = SocialSwarm::new(state);
        slpso_step(&mut swarm, &SlpsoParams::default(), &mut ev, &mut RandomStream::new(1, 0));
        assert!(swarm.state.xs.iter().all(|y| *y == x));
    }

    #[test]
    fn best_particle_is_untouched() {
        let mut ev = sphere(4, 1000);
        let mut rng = RandomStream::new(2, 0);
        let state = OptimizerState::initialize(&mut ev, 10, None, &mut rng).unwrap();
        let mut swarm = SocialSwarm::new(state);
        for _ in 0..5 {
            let b = swarm.state.ranking()[0];
            let (bx, bf) = (swarm.state.xs[b].clone(), swarm.state.fs[b]);
            slpso_step(&mut swarm, &SlpsoParams::default(), &mut ev, &mut rng);
            assert_eq!(swarm.state.xs[b], bx);
            assert_eq!(swarm.state.fs[b], bf);
        }
    }

    #[test]
    fn solves_sphere() {
        let mut ev = sphere(10, 5000);
        let best = Slpso::new(SlpsoParams::default()).unwrap().optimize(&mut ev, None, &mut RandomStream::new(4, 0));
        assert!(best.unwrap().f > -1e-1);
    }
}
