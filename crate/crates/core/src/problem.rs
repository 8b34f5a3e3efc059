//! Metered evaluation of objectives.
//!
//! Optimizers never call an [`Objective`] directly. They see a [`Problem`],
//! which charges every evaluation against an [`EvalBudget`]. The root problem
//! is an [`Evaluator`], which also keeps the incumbent and the convergence
//! trace. [`SubProblem`] and [`LocalBudget`] are views on another problem used
//! by the cooperative schemes.

use rayon::prelude::*;

use crate::domain::{Bounds, EvalBudget};
use crate::error::{invalid, Result};

/// Outcome of one objective evaluation. Fitness is maximised.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<D> {
    pub fitness: f64,
    pub feasible: bool,
    pub detail: D,
}

/// A pure, maximised objective over a box-bounded space.
pub trait Objective: Sync {
    type Detail: Clone + Send;

    fn bounds(&self) -> Bounds;

    fn evaluate(&self, x: &[f64]) -> Evaluation<Self::Detail>;

    /// Whether batches are worth spreading over threads.
    fn parallel(&self) -> bool {
        false
    }
}

/// Wraps a closure as an always-feasible objective.
pub struct FnObjective<F> {
    bounds: Bounds,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(bounds: Bounds, f: F) -> Self {
        FnObjective { bounds, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    type Detail = ();

    fn bounds(&self) -> Bounds {
        self.bounds.clone()
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation<()> {
        Evaluation { fitness: (self.f)(x), feasible: true, detail: () }
    }
}

/// An evaluated point.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub f: f64,
}

impl Candidate {
    pub fn new(x: Vec<f64>, f: f64) -> Self {
        Candidate { x, f }
    }
}

/// The view an optimizer has of the search problem.
pub trait Problem {
    fn bounds(&self) -> &Bounds;

    /// Evaluations still available through this view.
    fn remaining(&self) -> u64;

    /// Evaluates points in order until the budget runs out. The result is
    /// shorter than `xs` exactly when the budget was exhausted part-way.
    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64>;

    fn dim(&self) -> usize {
        self.bounds().dim()
    }

    fn is_exhausted(&self) -> bool {
        self.remaining() == 0
    }

    /// `None` when no budget is left.
    fn evaluate(&mut self, x: &[f64]) -> Option<f64> {
        self.evaluate_batch(std::slice::from_ref(&x.to_vec())).pop()
    }

    /// Best point seen so far, for problems that track one.
    fn best(&self) -> Option<Candidate> {
        None
    }
}

impl<P: Problem + ?Sized> Problem for &mut P {
    fn bounds(&self) -> &Bounds {
        (**self).bounds()
    }

    fn remaining(&self) -> u64 {
        (**self).remaining()
    }

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        (**self).evaluate_batch(xs)
    }

    fn best(&self) -> Option<Candidate> {
        (**self).best()
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Global evaluation count at which the incumbent changed.
    pub evals: u64,
    pub best_fitness: f64,
}

/// Best point seen so far by an [`Evaluator`].
#[derive(Debug, Clone)]
pub struct Incumbent<D> {
    pub x: Vec<f64>,
    pub fitness: f64,
    pub feasible: bool,
    pub detail: D,
    pub at_eval: u64,
}

impl<D> Incumbent<D> {
    pub fn candidate(&self) -> Candidate {
        Candidate::new(self.x.clone(), self.fitness)
    }
}

/// Feasible points beat infeasible ones; otherwise higher fitness wins.
fn improves(fitness: f64, feasible: bool, current: Option<(f64, bool)>) -> bool {
    match current {
        None => !fitness.is_nan(),
        Some((f, feas)) => (feasible && !feas) || (feasible == feas && fitness > f),
    }
}

/// Root problem: meters an objective against a budget and tracks the
/// incumbent and convergence trace.
///
/// The incumbent is ordered feasibility-first, so the trace is non-decreasing
/// in fitness except possibly at the switch from an infeasible incumbent to
/// the first feasible one.
pub struct Evaluator<O: Objective> {
    objective: O,
    bounds: Bounds,
    budget: EvalBudget,
    used: u64,
    incumbent: Option<Incumbent<O::Detail>>,
    trace: Vec<TracePoint>,
    history: Option<Vec<Incumbent<O::Detail>>>,
}

impl<O: Objective> Evaluator<O> {
    pub fn new(objective: O, budget: EvalBudget) -> Self {
        let bounds = objective.bounds();
        Evaluator { objective, bounds, budget, used: 0, incumbent: None, trace: Vec::new(), history: None }
    }

    /// Keeps a copy of every incumbent as it is replaced.
    pub fn record_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    pub fn objective(&self) -> &O {
        &self.objective
    }

    pub fn budget(&self) -> &EvalBudget {
        &self.budget
    }

    /// Evaluations charged through this evaluator.
    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn incumbent(&self) -> Option<&Incumbent<O::Detail>> {
        self.incumbent.as_ref()
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    pub fn history(&self) -> Option<&[Incumbent<O::Detail>]> {
        self.history.as_deref()
    }

    pub fn into_parts(self) -> (Option<Incumbent<O::Detail>>, Vec<TracePoint>, Option<Vec<Incumbent<O::Detail>>>) {
        (self.incumbent, self.trace, self.history)
    }

    /// Metered evaluation returning the full evaluation records of the
    /// evaluated prefix.
    pub fn evaluate_detailed(&mut self, xs: &[Vec<f64>]) -> Vec<Evaluation<O::Detail>> {
        for x in xs {
            debug_assert_eq!(x.len(), self.bounds.dim());
        }
        let granted = self.budget.try_consume(xs.len() as u64) as usize;
        let first_eval = self.budget.consumed() - granted as u64 + 1;
        let batch = &xs[..granted];
        let results: Vec<Evaluation<O::Detail>> = if self.objective.parallel() && granted > 1 {
            batch.par_iter().map(|x| self.objective.evaluate(x)).collect()
        } else {
            batch.iter().map(|x| self.objective.evaluate(x)).collect()
        };
        self.used += granted as u64;
        for (i, (x, ev)) in batch.iter().zip(&results).enumerate() {
            let current = self.incumbent.as_ref().map(|c| (c.fitness, c.feasible));
            if improves(ev.fitness, ev.feasible, current) {
                let at_eval = first_eval + i as u64;
                let inc = Incumbent {
                    x: x.clone(),
                    fitness: ev.fitness,
                    feasible: ev.feasible,
                    detail: ev.detail.clone(),
                    at_eval,
                };
                if let Some(h) = self.history.as_mut() {
                    h.push(inc.clone());
                }
                self.incumbent = Some(inc);
                self.trace.push(TracePoint { evals: at_eval, best_fitness: ev.fitness });
            }
        }
        results
    }
}

impl<O: Objective> Problem for Evaluator<O> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn remaining(&self) -> u64 {
        self.budget.remaining()
    }

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        self.evaluate_detailed(xs).into_iter().map(|e| e.fitness).collect()
    }

    fn best(&self) -> Option<Candidate> {
        self.incumbent.as_ref().map(Incumbent::candidate)
    }
}

/// Optimizes a subset of dimensions with the rest held at a context vector.
pub struct SubProblem<'a> {
    parent: &'a mut dyn Problem,
    context: Vec<f64>,
    indices: Vec<usize>,
    bounds: Bounds,
}

impl<'a> SubProblem<'a> {
    pub fn new(parent: &'a mut dyn Problem, context: Vec<f64>, indices: Vec<usize>) -> Result<Self> {
        if context.len() != parent.dim() {
            return Err(invalid("context vector does not match the problem dimension"));
        }
        if indices.is_empty() || indices.iter().any(|&i| i >= context.len()) {
            return Err(invalid("group indices must be non-empty and inside the problem"));
        }
        let bounds = parent.bounds().select(&indices);
        Ok(SubProblem { parent, context, indices, bounds })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn context(&self) -> &[f64] {
        &self.context
    }

    /// Group values of the context vector.
    pub fn extract(&self) -> Vec<f64> {
        self.indices.iter().map(|&i| self.context[i]).collect()
    }

    /// Full-space point with the group dimensions replaced.
    pub fn embed(&self, sub: &[f64]) -> Vec<f64> {
        let mut full = self.context.clone();
        for (&i, &v) in self.indices.iter().zip(sub) {
            full[i] = v;
        }
        full
    }
}

impl Problem for SubProblem<'_> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn remaining(&self) -> u64 {
        self.parent.remaining()
    }

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        let full: Vec<Vec<f64>> = xs.iter().map(|x| self.embed(x)).collect();
        self.parent.evaluate_batch(&full)
    }
}

/// Caps the number of evaluations available through a view.
pub struct LocalBudget<'a> {
    parent: &'a mut dyn Problem,
    remaining: u64,
}

impl<'a> LocalBudget<'a> {
    pub fn new(parent: &'a mut dyn Problem, cap: u64) -> Self {
        LocalBudget { parent, remaining: cap }
    }
}

impl Problem for LocalBudget<'_> {
    fn bounds(&self) -> &Bounds {
        self.parent.bounds()
    }

    fn remaining(&self) -> u64 {
        self.remaining.min(self.parent.remaining())
    }

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Vec<f64> {
        let n = (xs.len() as u64).min(self.remaining) as usize;
        let values = self.parent.evaluate_batch(&xs[..n]);
        self.remaining -= values.len() as u64;
        values
    }

    fn best(&self) -> Option<Candidate> {
        self.parent.best()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> FnObjective<impl Fn(&[f64]) -> f64 + Sync> {
        FnObjective::new(Bounds::uniform(2, -1.0, 1.0), |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>())
    }

    #[test]
    fn evaluator_counts_exactly_and_stops() {
        let budget = EvalBudget::new(3);
        let mut ev = Evaluator::new(sphere(), budget.clone());
        let xs = vec![vec![0.5, 0.5], vec![0.1, 0.0], vec![0.9, 0.0], vec![0.0, 0.0]];
        assert_eq!(ev.evaluate_batch(&xs).len(), 3);
        assert_eq!(budget.consumed(), 3);
        assert_eq!(ev.used(), 3);
        // The prefix was still seen.
        assert_eq!(ev.incumbent().unwrap().x, vec![0.1, 0.0]);
        assert_eq!(ev.trace().len(), 2);
        assert_eq!(ev.trace()[1].evals, 2);
        assert_eq!(ev.evaluate(&[0.0, 0.0]), None);
    }

    #[test]
    fn feasible_points_displace_infeasible_incumbents() {
        struct Constrained;
        impl Objective for Constrained {
            type Detail = ();
            fn bounds(&self) -> Bounds {
                Bounds::uniform(1, -10.0, 10.0)
            }
            fn evaluate(&self, x: &[f64]) -> Evaluation<()> {
                Evaluation { fitness: x[0], feasible: x[0] < 0.0, detail: () }
            }
        }
        let mut ev = Evaluator::new(Constrained, EvalBudget::new(10));
        ev.evaluate_batch(&[vec![5.0], vec![-3.0], vec![8.0], vec![-1.0]]);
        let inc = ev.incumbent().unwrap();
        assert_eq!(inc.x, vec![-1.0]);
        assert!(inc.feasible);
    }

    #[test]
    fn sub_problem_touches_only_its_group() {
        let budget = EvalBudget::new(10);
        let mut ev = Evaluator::new(
            FnObjective::new(Bounds::uniform(4, -1.0, 1.0), |x: &[f64]| x[0] + 10.0 * x[3]),
            budget,
        );
        let mut sub = SubProblem::new(&mut ev, vec![0.1, 0.2, 0.3, 0.4], vec![1, 2]).unwrap();
        assert_eq!(sub.extract(), vec![0.2, 0.3]);
        assert_eq!(sub.embed(&[0.9, -0.9]), vec![0.1, 0.9, -0.9, 0.4]);
        assert_eq!(sub.evaluate(&[0.0, 0.0]).unwrap(), 0.1 + 4.0);
        assert!(SubProblem::new(&mut ev, vec![0.0; 4], vec![7]).is_err());
    }

    #[test]
    fn local_budget_caps_and_charges_parent() {
        let budget = EvalBudget::new(100);
        let mut ev = Evaluator::new(sphere(), budget.clone());
        let mut local = LocalBudget::new(&mut ev, 2);
        assert_eq!(local.remaining(), 2);
        let r = local.evaluate_batch(&[vec![0.0, 0.0], vec![0.1, 0.1], vec![0.2, 0.2]]);
        assert_eq!(r.len(), 2);
        assert_eq!(local.remaining(), 0);
        assert_eq!(budget.consumed(), 2);
    }
}
