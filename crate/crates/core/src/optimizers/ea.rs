use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Optimizer;
use crate::domain::RandomStream;
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EaParams {
    /// Initial mutation step as a fraction of each dimension's range. The
    /// step falls linearly to zero over the generation horizon.
    pub sigma: f64,
    /// Generations per call; `0` runs until the budget is spent.
    pub generations: u64,
}

impl Default for EaParams {
    fn default() -> Self {
        EaParams { sigma: 0.1, generations: 0 }
    }
}

/// One (1+1)-EA generation. Each gene mutates with probability `1/n` (at
/// least one always does) by a Gaussian step of `sigma` times its range.
/// The child replaces the parent unless it is worse. Returns false when no
/// budget was left.
pub fn one_plus_one_ea_step(
    parent: &mut Candidate,
    sigma: f64,
    problem: &mut dyn Problem,
    rng: &mut RandomStream,
) -> bool {
    let bounds = problem.bounds().clone();
    let n = parent.x.len();
    let rate = 1.0 / n as f64;
    let mut child = parent.x.clone();
    let forced = rng.random_range(0..n);
    for (j, v) in child.iter_mut().enumerate() {
        let mutate = rng.random::<f64>() < rate;
        let step = Normal::new(0.0, 1.0).expect("unit normal").sample(rng) * sigma * bounds.range(j);
        if mutate || j == forced {
            *v += step;
        }
    }
    bounds.clamp(&mut child);
    let Some(f) = problem.evaluate(&child) else { return false };
    if f >= parent.f {
        *parent = Candidate::new(child, f);
    }
    true
}

/// (1+1) evolutionary algorithm with a linearly decreasing step size.
#[derive(Debug, Clone)]
pub struct OnePlusOneEa {
    params: EaParams,
}

impl OnePlusOneEa {
    pub fn new(params: EaParams) -> Self {
        OnePlusOneEa { params }
    }
}

impl Optimizer for OnePlusOneEa {
    fn id(&self) -> &str {
        "ea1p1"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let mut parent = match start {
            Some(s) => s.clone(),
            None => {
                let x = problem.bounds().sample(rng);
                let f = problem.evaluate(&x)?;
                Candidate::new(x, f)
            }
        };
        let horizon = match self.params.generations {
            0 => problem.remaining(),
            g => g.min(problem.remaining()),
        };
        for t in 0..horizon {
            let sigma = self.params.sigma * (1.0 - t as f64 / horizon as f64);
            if !one_plus_one_ea_step(&mut parent, sigma, problem, rng) {
                break;
            }
        }
        Some(parent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Bounds, EvalBudget};
    use crate::problem::{Evaluator, FnObjective};

    fn quadratic() -> Evaluator<FnObjective<impl Fn(&[f64]) -> f64 + Sync>> {
        Evaluator::new(
            FnObjective::new(Bounds::uniform(1, -10.0, 10.0), |x: &[f64]| -(x[0] - 2.0).powi(2)),
            EvalBudget::new(10_000),
        )
    }

    #[test]
    fn zero_sigma_keeps_parent() {
        let mut ev = quadratic();
        let mut parent = Candidate::new(vec![1.0], -1.0);
        assert!(one_plus_one_ea_step(&mut parent, 0.0, &mut ev, &mut RandomStream::new(0, 0)));
        assert_eq!(parent, Candidate::new(vec![1.0], -1.0));
    }

    #[test]
    fn elitist_and_converges_on_quadratic() {
        let mut ev = quadratic();
        let mut rng = RandomStream::new(7, 0);
        let mut parent = Candidate::new(vec![-8.0], -100.0);
        let mut last = parent.f;
        for t in 0..500 {
            one_plus_one_ea_step(&mut parent, 0.1 * (1.0 - t as f64 / 500.0), &mut ev, &mut rng);
            assert!(parent.f >= last);
            last = parent.f;
        }
        assert!((parent.x[0] - 2.0).abs() < 0.1, "{:?}", parent.x);
    }

    #[test]
    fn generation_cap_limits_evaluations() {
        let mut ev = quadratic();
        let mut ea = OnePlusOneEa::new(EaParams { generations: 100, ..EaParams::default() });
        ea.optimize(&mut ev, Some(&Candidate::new(vec![0.0], -4.0)), &mut RandomStream::new(1, 0));
        assert_eq!(ev.used(), 100);
    }
}
