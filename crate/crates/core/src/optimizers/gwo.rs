use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_population, generations, Optimizer, OptimizerState};
use crate::domain::RandomStream;
use crate::error::{invalid, Result};
use crate::problem::{Candidate, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GwoParams {
    pub population: usize,
}

impl Default for GwoParams {
    fn default() -> Self {
        GwoParams { population: 50 }
    }
}

/// Linear control parameter `2 - iter * 2 / max_iter`.
pub fn gwo_control_a(iter: usize, max_iter: usize) -> f64 {
    2.0 - iter as f64 * (2.0 / max_iter as f64)
}

/// Deterministic core of the wolf update. `a_coef[k]` and `c_coef[k]` hold
/// the per-dimension `A` and `C` coefficients for leader `k`.
pub fn gwo_move(x: &[f64], leaders: [&[f64]; 3], a_coef: [&[f64]; 3], c_coef: [&[f64]; 3]) -> Result<Vec<f64>> {
    let n = x.len();
    if leaders.iter().chain(&a_coef).chain(&c_coef).any(|v| v.len() != n) {
        return Err(invalid("wolf, leaders and coefficients must share one dimension"));
    }
    Ok((0..n)
        .map(|j| {
            let mut sum = 0.0;
            for k in 0..3 {
                let d = (c_coef[k][j] * leaders[k][j] - x[j]).abs();
                sum += leaders[k][j] - a_coef[k][j] * d;
            }
            sum / 3.0
        })
        .collect())
}

/// Moves a wolf towards the alpha, beta and delta leaders with fresh
/// `A = 2a r1 - a` and `C = 2 r2` per dimension and leader.
pub fn gwo_update(
    x: &[f64],
    alpha: &[f64],
    beta: &[f64],
    delta: &[f64],
    a: f64,
    rng: &mut RandomStream,
) -> Result<Vec<f64>> {
    let n = x.len();
    let mut a_coef = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut c_coef = a_coef.clone();
    for j in 0..n {
        for k in 0..3 {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            a_coef[k][j] = 2.0 * a * r1 - a;
            c_coef[k][j] = 2.0 * r2;
        }
    }
    gwo_move(x, [alpha, beta, delta], [&a_coef[0], &a_coef[1], &a_coef[2]], [&c_coef[0], &c_coef[1], &c_coef[2]])
}

/// A wolf pack with elitist alpha, beta and delta leaders.
#[derive(Debug, Clone)]
pub(crate) struct Pack {
    pub state: OptimizerState,
    pub leaders: Vec<Candidate>,
}

impl Pack {
    pub fn new(state: OptimizerState) -> Self {
        let mut pack = Pack { state, leaders: Vec::new() };
        pack.update_leaders();
        pack
    }

    pub fn alpha(&self) -> &Candidate {
        &self.leaders[0]
    }

    /// Top three of the previous leaders and the current pack.
    fn update_leaders(&mut self) {
        let mut pool = std::mem::take(&mut self.leaders);
        pool.extend(self.state.xs.iter().zip(&self.state.fs).map(|(x, &f)| Candidate::new(x.clone(), f)));
        pool.sort_by(|a, b| b.f.total_cmp(&a.f));
        pool.dedup_by(|a, b| a.x == b.x);
        pool.truncate(3);
        while pool.len() < 3 {
            pool.push(pool[0].clone());
        }
        self.leaders = pool;
    }

    /// Moves every wolf with control `a`, evaluates the pack and updates the
    /// leaders. Returns the best fitness of this iteration, or `None` when
    /// the budget ran out before the whole pack was evaluated.
    pub fn step(&mut self, problem: &mut dyn Problem, a: f64, rng: &mut RandomStream) -> Option<f64> {
        let bounds = problem.bounds().clone();
        let [alpha, beta, delta] = [&self.leaders[0].x, &self.leaders[1].x, &self.leaders[2].x];
        let moved: Vec<Vec<f64>> = self
            .state
            .xs
            .iter()
            .map(|x| {
                let mut y = gwo_update(x, alpha, beta, delta, a, rng).expect("pack shares one dimension");
                bounds.clamp(&mut y);
                y
            })
            .collect();
        let values = self.state.evaluate(problem, &moved);
        let complete = values.len() == moved.len();
        let iteration_best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, (x, f)) in moved.into_iter().zip(values).enumerate() {
            self.state.xs[i] = x;
            self.state.fs[i] = f;
        }
        self.state.iteration += 1;
        self.update_leaders();
        complete.then_some(iteration_best)
    }
}

/// Grey wolf optimizer with the linear control schedule.
#[derive(Debug, Clone)]
pub struct Gwo {
    params: GwoParams,
    a_trace: Vec<f64>,
}

impl Gwo {
    pub fn new(params: GwoParams) -> Result<Self> {
        check_population(params.population, 3, "gwo")?;
        Ok(Gwo { params, a_trace: Vec::new() })
    }

    /// Control parameter used at each iteration of the last run.
    pub fn a_trace(&self) -> &[f64] {
        &self.a_trace
    }
}

impl Optimizer for Gwo {
    fn id(&self) -> &str {
        "gwo"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        self.a_trace.clear();
        let mu = self.params.population;
        let max_iter = generations(problem.remaining(), mu).max(1);
        let Some(state) = OptimizerState::initialize(problem, mu, start, rng) else {
            return start.cloned();
        };
        let mut pack = Pack::new(state);
        let mut iter = 0;
        while !problem.is_exhausted() {
            let a = gwo_control_a(iter.min(max_iter), max_iter);
            self.a_trace.push(a);
            pack.step(problem, a, rng);
            iter += 1;
        }
        Some(pack.alpha().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::testing::sphere;

    #[test]
    fn control_endpoints() {
        assert_eq!(gwo_control_a(0, 100), 2.0);
        assert_eq!(gwo_control_a(50, 100), 1.0);
        assert_eq!(gwo_control_a(100, 100), 0.0);
        assert_eq!(gwo_control_a(0, 7), 2.0);
        assert_eq!(gwo_control_a(7, 7), 0.0);
    }

    #[test]
    fn fixed_point_when_leaders_coincide() {
        let x = [1.5, -2.0];
        let ones = [1.0, 1.0];
        let a = [0.3, -0.7];
        assert_eq!(gwo_move(&x, [&x, &x, &x], [&a, &a, &a], [&ones, &ones, &ones]).unwrap(), x.to_vec());
    }

    #[test]
    fn zero_a_averages_leaders() {
        let mut rng = RandomStream::new(5, 0);
        let (alpha, beta, delta) = ([3.0, 0.0], [0.0, 3.0], [0.0, 0.0]);
        for x in [[10.0, 10.0], [-4.0, 1.0]] {
            let y = gwo_update(&x, &alpha, &beta, &delta, 0.0, &mut rng).unwrap();
            assert_eq!(y, vec![1.0, 1.0]);
        }
    }

    #[test]
    fn hand_evaluated_move() {
        let zero = [0.0];
        let y = gwo_move(&[1.0], [&zero, &zero, &zero], [&[0.5], &[0.5], &[0.5]], [&[1.0], &[1.0], &[1.0]]).unwrap();
        assert_eq!(y, vec![-0.5]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = RandomStream::new(5, 0);
        assert!(gwo_update(&[0.0, 1.0], &[0.0], &[0.0, 1.0], &[0.0, 1.0], 1.0, &mut rng).is_err());
    }

    #[test]
    fn coefficient_ranges() {
        let mut rng = RandomStream::new(9, 0);
        let a = 1.3;
        for _ in 0..2000 {
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            assert!((2.0 * a * r1 - a).abs() <= a);
            assert!((0.0..=2.0).contains(&(2.0 * r2)));
        }
    }

    #[test]
    fn exploration_vanishes_in_second_half() {
        // |A| > 1 needs a > 1; with A uniform on [-a, a] the chance is (a-1)/a.
        let mut rng = RandomStream::new(4, 0);
        let draws = 100_000;
        for (iter, max_iter) in [(0, 100), (25, 100), (50, 100), (75, 100)] {
            let a = gwo_control_a(iter, max_iter);
            let count = (0..draws).filter(|_| (2.0 * a * rng.random::<f64>() - a).abs() > 1.0).count();
            let expected = ((a - 1.0) / a).max(0.0);
            assert!((count as f64 / draws as f64 - expected).abs() < 0.01, "a = {a}");
        }
    }

    #[test]
    fn improves_on_sphere() {
        let mut ev = sphere(10, 5000);
        let mut gwo = Gwo::new(GwoParams::default()).unwrap();
        let best = gwo.optimize(&mut ev, None, &mut RandomStream::new(1, 0)).unwrap();
        assert!(best.f > -1e-2, "{}", best.f);
        assert_eq!(gwo.a_trace()[0], 2.0);
        assert!(gwo.a_trace().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn one_round_budget_returns_best_initial_wolf() {
        let mut ev = sphere(3, 50);
        let best = Gwo::new(GwoParams::default()).unwrap().optimize(&mut ev, None, &mut RandomStream::new(2, 0));
        assert_eq!(best.unwrap().f, ev.incumbent().unwrap().fitness);
        assert_eq!(ev.used(), 50);
    }
}
