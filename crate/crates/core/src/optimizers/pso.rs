use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_population, generations, Optimizer, OptimizerState};
use crate::domain::{Bounds, RandomStream};
use crate::error::Result;
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub population: usize,
    pub c1: f64,
    pub c2: f64,
    /// Inertia at the first and last generation, interpolated linearly.
    pub inertia_start: f64,
    pub inertia_end: f64,
    /// Velocity limit as a fraction of each dimension's range.
    pub max_velocity: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams { population: 50, c1: 1.5, c2: 2.0, inertia_start: 1.0, inertia_end: 0.0, max_velocity: 0.2 }
    }
}

/// Swarm with velocities and personal bests.
#[derive(Debug, Clone)]
pub struct Swarm {
    pub state: OptimizerState,
    pub velocity: Vec<Vec<f64>>,
    pub personal: Vec<Candidate>,
}

impl Swarm {
    pub fn new(state: OptimizerState, bounds: &Bounds, params: &PsoParams, rng: &mut RandomStream) -> Self {
        let velocity = state
            .xs
            .iter()
            .map(|_| {
                (0..bounds.dim())
                    .map(|j| {
                        let v = params.max_velocity * bounds.range(j);
                        if v > 0.0 {
                            rng.random_range(-v..=v)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let personal = state.xs.iter().zip(&state.fs).map(|(x, &f)| Candidate::new(x.clone(), f)).collect();
        Swarm { state, velocity, personal }
    }
}

/// One generation of global-best PSO with inertia `omega`. Returns false
/// when the budget ran out during the generation.
pub fn pso_step(
    swarm: &mut Swarm,
    params: &PsoParams,
    omega: f64,
    problem: &mut dyn Problem,
    rng: &mut RandomStream,
) -> bool {
    let bounds = problem.bounds().clone();
    let global = swarm.state.best.x.clone();
    let n = swarm.state.len();
    for i in 0..n {
        let x = &mut swarm.state.xs[i];
        let v = &mut swarm.velocity[i];
        let p = &swarm.personal[i].x;
        for j in 0..x.len() {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let vmax = params.max_velocity * bounds.range(j);
            v[j] = (omega * v[j] + params.c1 * r1 * (p[j] - x[j]) + params.c2 * r2 * (global[j] - x[j])).clamp(-vmax, vmax);
            x[j] += v[j];
        }
        bounds.clamp(x);
    }
    let moved = swarm.state.xs.clone();
    let values = swarm.state.evaluate(problem, &moved);
    for (i, &f) in values.iter().enumerate() {
        swarm.state.fs[i] = f;
        if f >= swarm.personal[i].f {
            swarm.personal[i] = Candidate::new(moved[i].clone(), f);
        }
    }
    swarm.state.iteration += 1;
    values.len() == n
}

/// Particle swarm optimisation with linearly decreasing inertia.
#[derive(Debug, Clone)]
pub struct Pso {
    params: PsoParams,
}

impl Pso {
    pub fn new(params: PsoParams) -> Result<Self> {
        check_population(params.population, 1, "pso")?;
        Ok(Pso { params })
    }
}

impl Optimizer for Pso {
    fn id(&self) -> &str {
        "pso"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let p = &self.params;
        let max_iter = generations(problem.remaining(), p.population).max(1);
        let state = OptimizerState::initialize(problem, p.population, start, rng)?;
        let bounds = problem.bounds().clone();
        let mut swarm = Swarm::new(state, &bounds, p, rng);
        loop {
            let t = (swarm.state.iteration as f64 / max_iter as f64).min(1.0);
            let omega = p.inertia_start + (p.inertia_end - p.inertia_start) * t;
            if !pso_step(&mut swarm, p, omega, problem, rng) {
                break;
            }
        }
        Some(swarm.state.best)
    }
}
