//! One-at-a-time buoy placement with cooperative PTO tuning and
//! backtracking.
//!
//! Buoys are added one per stage. Each new buoy is sampled around the
//! previously placed one, its PTO is tuned by the optimizer the contribution
//! ledger currently favours, and its position is polished by Nelder-Mead.
//! Once the farm is complete, the remaining budget goes to backtracking
//! cycles that revisit the weakest buoys and retune every PTO together.

mod log;
mod sampling;

use serde::{Deserialize, Serialize};

pub use log::{write_placement_log, PlacementRecord, SampledCandidate};
pub use sampling::{
    find_worst, gaussian_sample, place_first_buoy, placement_feasible, random_feasible_position, symmetric_sample,
    worst_count,
};

use crate::cooperative::schedule::Shift;
use crate::cooperative::{optimize_group, ContributionLedger, VariableGroup};
use crate::domain::{EvalBudget, Layout, PtoProfile, RandomStream};
use crate::error::{invalid, Result};
use crate::model::{EvaluatedLayout, FarmObjective};
use crate::optimizers::{build_optimizer, NelderMead, NmParams, Optimizer, OptimizerParams, Population};
use crate::problem::{Candidate, Evaluator, LocalBudget, Problem, SubProblem, TracePoint};

/// How candidate positions for a new buoy are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// One candidate per configured angle at a random radius in
    /// `[safe, safe + r_prime]`, plus refinement at the best angle.
    Symmetric,
    /// Normally distributed offsets around the previous buoy.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HccaParams {
    /// Optimizers competing for the PTO groups.
    pub pool: Vec<String>,
    pub sampling: Sampling,
    /// Sampling angles in degrees.
    pub angles: Vec<f64>,
    /// Offset in degrees of the two refinement samples around the best
    /// angle; zero disables refinement.
    pub refine_angle: f64,
    /// Radial extension beyond the safe distance, metres.
    pub r_prime: f64,
    pub gaussian_sigma: f64,
    pub gaussian_samples: usize,
    /// Budget of each optimizer in the first-buoy tournament.
    pub tournament_budget: u64,
    /// Budget of the PTO phase of each new buoy.
    pub pto_budget: u64,
    /// Evaluation cap of each Nelder-Mead position refinement.
    pub nm_cap: u64,
    pub backtracking: bool,
    /// Share of buoys revisited per backtracking cycle.
    pub worst_fraction: f64,
    /// Budget of the global PTO pass of each backtracking cycle.
    pub boa_pto_budget: u64,
    /// Attempts of the uniform fallback placement.
    pub fallback_tries: usize,
    /// Size of the population carried between PTO phases.
    pub population: usize,
    /// Carry one population through every PTO phase instead of restarting.
    pub share_population: bool,
}

impl Default for HccaParams {
    fn default() -> Self {
        HccaParams {
            pool: vec!["slpso".into(), "sansde".into(), "agwo".into()],
            sampling: Sampling::Symmetric,
            angles: (0..8).map(|i| 45.0 * i as f64).collect(),
            refine_angle: 15.0,
            r_prime: 100.0,
            gaussian_sigma: 100.0,
            gaussian_samples: 512,
            tournament_budget: 500,
            pto_budget: 1000,
            nm_cap: 100,
            backtracking: true,
            worst_fraction: 0.25,
            boa_pto_budget: 1000,
            fallback_tries: 10_000,
            population: 50,
            share_population: true,
        }
    }
}

impl HccaParams {
    /// Local Gaussian sampling with Nelder-Mead for everything and no
    /// revisiting of placed buoys; leftover budget goes to global PTO passes.
    pub fn ls_nm() -> Self {
        HccaParams {
            pool: vec!["nm".into()],
            sampling: Sampling::Gaussian,
            refine_angle: 0.0,
            worst_fraction: 0.0,
            ..Self::default()
        }
    }

    /// Symmetric sampling with Nelder-Mead for everything, with backtracking.
    pub fn sls_nm_b() -> Self {
        HccaParams { pool: vec!["nm".into()], ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool.is_empty() {
            return Err(invalid("hcca pool is empty"));
        }
        if self.sampling == Sampling::Symmetric && self.angles.is_empty() {
            return Err(invalid("symmetric sampling needs at least one angle"));
        }
        if self.sampling == Sampling::Gaussian && (self.gaussian_samples == 0 || !(self.gaussian_sigma > 0.0)) {
            return Err(invalid("gaussian sampling needs samples and a positive sigma"));
        }
        if !(self.r_prime >= 0.0) || !(0.0..=1.0).contains(&self.worst_fraction) || !(self.refine_angle >= 0.0) {
            return Err(invalid("r_prime and refine_angle must be non-negative and worst_fraction in [0, 1]"));
        }
        if self.population == 0 {
            return Err(invalid("population must be positive"));
        }
        if self.pto_budget == 0 || self.boa_pto_budget == 0 {
            return Err(invalid("phase budgets must be positive"));
        }
        Ok(())
    }
}

/// One backtracking cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoaCycle {
    pub worst: Vec<usize>,
    pub optimizer: String,
    pub before: f64,
    pub after: f64,
    pub evaluations: u64,
}

/// Result of an HCCA run.
#[derive(Debug, Clone)]
pub struct HccaOutcome {
    /// Best layout of the largest farm reached.
    pub best: Option<EvaluatedLayout>,
    /// Whether every buoy was placed.
    pub complete: bool,
    pub placed: usize,
    /// Convergence trace of the largest farm reached.
    pub trace: Vec<TracePoint>,
    /// Every incumbent of every stage, in the order they were found.
    pub incumbents: Vec<EvaluatedLayout>,
    pub placements: Vec<PlacementRecord>,
    pub boa: Vec<BoaCycle>,
    pub ledger: ContributionLedger,
    /// Evaluations charged per stage, index `i` for the `i + 1` buoy farm.
    pub stage_evaluations: Vec<u64>,
}

/// Population of one variable group, remembering the out-of-group values
/// its fitness was measured against.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SharedPopulation {
    pub members: Population,
    context: Option<Vec<f64>>,
}

impl SharedPopulation {
    /// Members whose fitness is unknown for any context.
    pub fn unevaluated(members: Population) -> Self {
        SharedPopulation { members, context: None }
    }
}

fn outside(x: &[f64], indices: &[usize]) -> Vec<f64> {
    let mut v = x.to_vec();
    for &i in indices {
        v[i] = f64::NAN;
    }
    v
}

fn same_context(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
}

/// Optimizes `indices` from the incumbent with a shared population for at
/// most `budget` evaluations. Members measured in another context are
/// re-evaluated first, and the incumbent always joins the population.
/// Returns before, after and evaluations used.
pub fn run_shared_phase(
    problem: &mut dyn Problem,
    indices: &[usize],
    optimizer: &mut dyn Optimizer,
    shared: &mut SharedPopulation,
    budget: u64,
    rng: &mut RandomStream,
) -> Result<(f64, f64, u64)> {
    let inc = problem.best().ok_or_else(|| invalid("phase needs an evaluated incumbent"))?;
    let context = outside(&inc.x, indices);
    let remaining = problem.remaining();
    {
        let mut local = LocalBudget::new(problem, budget);
        let mut sub = SubProblem::new(&mut local, inc.x.clone(), indices.to_vec())?;
        let start = sub.extract();
        if !shared.context.as_deref().is_some_and(|c| same_context(c, &context)) {
            let others: Vec<Vec<f64>> = shared.members.xs.iter().filter(|x| **x != start).cloned().collect();
            let fs = sub.evaluate_batch(&others);
            let n = fs.len();
            shared.members = Population { xs: others.into_iter().take(n).collect(), fs };
            shared.context = Some(context);
        }
        if !shared.members.xs.contains(&start) {
            shared.members.xs.push(start);
            shared.members.fs.push(inc.f);
        }
        while !sub.is_exhausted() {
            let before = sub.remaining();
            optimizer.optimize_population(&mut sub, &mut shared.members, rng);
            if sub.remaining() == before {
                break;
            }
        }
    }
    let after = problem.best().map_or(inc.f, |b| b.f);
    Ok((inc.f, after, remaining - problem.remaining()))
}

/// Runs every pool optimizer on `indices` from the same start population,
/// each with `per_opt_budget` evaluations, and seeds a ledger from their
/// improvements over the start. The start population is the incumbent plus
/// `population_size - 1` uniform samples. The problem must already hold an
/// evaluated incumbent. Returns the best point found, the ledger and the
/// final population of the optimizer that found it.
pub fn first_buoy_pto_tournament(
    problem: &mut dyn Problem,
    indices: &[usize],
    pool: &mut [Box<dyn Optimizer>],
    per_opt_budget: u64,
    population_size: usize,
    rng: &mut RandomStream,
) -> Result<(Candidate, ContributionLedger, Population)> {
    let ids: Vec<String> = pool.iter().map(|o| o.id().to_string()).collect();
    let mut ledger = ContributionLedger::new(&ids)?;
    let start = problem.best().ok_or_else(|| invalid("tournament needs an evaluated start"))?;
    let initial = {
        let mut sub = SubProblem::new(problem, start.x.clone(), indices.to_vec())?;
        let mut pop = Population { xs: vec![sub.extract()], fs: vec![start.f] };
        let bounds = sub.bounds().clone();
        let xs: Vec<Vec<f64>> = (1..population_size).map(|_| bounds.sample(rng)).collect();
        let fs = sub.evaluate_batch(&xs);
        pop.xs.extend(xs.into_iter().take(fs.len()));
        pop.fs.extend(fs);
        pop
    };
    let mut shift = Shift::from_initial(start.f);
    let mut best = start.clone();
    let mut best_pop = initial.clone();
    for (k, opt) in pool.iter_mut().enumerate() {
        let mut pop = initial.clone();
        let found = {
            let mut local = LocalBudget::new(problem, per_opt_budget);
            let mut sub = SubProblem::new(&mut local, start.x.clone(), indices.to_vec())?;
            opt.optimize_population(&mut sub, &mut pop, rng).map(|c| Candidate::new(sub.embed(&c.x), c.f))
        };
        let after = found.as_ref().map_or(start.f, |c| c.f.max(start.f));
        ledger.record_improvement(k, shift.improvement(start.f, after));
        if let Some(c) = found {
            if c.f > best.f {
                best = c;
                best_pop = pop;
            }
        }
    }
    Ok((best, ledger, best_pop))
}

/// Member `j` joins the `j`-th best member of every buoy's population.
fn concatenate(pops: &[Population], size: usize) -> Population {
    let ranked: Vec<Vec<usize>> = pops
        .iter()
        .map(|p| {
            let mut idx: Vec<usize> = (0..p.len()).collect();
            idx.sort_by(|&a, &b| p.fs[b].total_cmp(&p.fs[a]));
            idx
        })
        .collect();
    if ranked.iter().any(Vec::is_empty) {
        return Population::default();
    }
    let xs = (0..size)
        .map(|j| pops.iter().zip(&ranked).flat_map(|(p, r)| p.xs[r[j % r.len()]].iter().copied()).collect())
        .collect();
    Population { xs, fs: vec![f64::NEG_INFINITY; size] }
}

/// Backtracking: repeatedly polishes the positions of the weakest buoys
/// with Nelder-Mead and then retunes every PTO with the ledger's best
/// optimizer, until the budget runs out or a cycle makes no evaluation.
/// `shared` is the population of the global PTO group.
pub fn backtracking(
    problem: &mut Evaluator<FarmObjective>,
    ledger: &ContributionLedger,
    pool: &mut [Box<dyn Optimizer>],
    shared: &mut SharedPopulation,
    params: &HccaParams,
    nm: &NmParams,
    rng: &mut RandomStream,
) -> Result<Vec<BoaCycle>> {
    let cfg = problem.objective().config().clone();
    let n_worst = worst_count(cfg.n_buoys, params.worst_fraction);
    let all_ptos = VariableGroup::all_ptos(cfg.n_buoys, cfg.n_frequencies);
    let mut nm = NelderMead::new(nm.clone());
    let mut cycles = Vec::new();
    while !problem.is_exhausted() {
        let Some(inc) = problem.incumbent() else { break };
        let before = inc.fitness;
        let worst = find_worst(&inc.detail.per_buoy_power, n_worst)?;
        let start_used = problem.used();
        for &b in &worst {
            let group = VariableGroup::position(b, cfg.n_frequencies);
            optimize_group(problem, &group.indices, &mut nm, params.nm_cap, rng)?;
        }
        let k = ledger.select();
        if !params.share_population {
            *shared = SharedPopulation::default();
        }
        run_shared_phase(problem, &all_ptos.indices, pool[k].as_mut(), shared, params.boa_pto_budget, rng)?;
        let evaluations = problem.used() - start_used;
        let after = problem.incumbent().map_or(before, |i| i.fitness);
        cycles.push(BoaCycle { worst, optimizer: ledger.entries()[k].id.clone(), before, after, evaluations });
        if evaluations == 0 {
            break;
        }
    }
    Ok(cycles)
}

/// Full HCCA run with the pool built from `params.pool`.
pub fn hcca_run(
    objective: &FarmObjective,
    budget: &EvalBudget,
    params: &HccaParams,
    optimizers: &OptimizerParams,
    rng: &mut RandomStream,
) -> Result<HccaOutcome> {
    let pool = params.pool.iter().map(|id| build_optimizer(id, optimizers)).collect::<Result<Vec<_>>>()?;
    hcca_run_with_pool(objective, budget, params, pool, &optimizers.nm, rng)
}

struct Stage {
    evaluator: Evaluator<FarmObjective>,
}

impl Stage {
    fn new(objective: &FarmObjective, n: usize, budget: &EvalBudget) -> Self {
        Stage { evaluator: Evaluator::new(objective.with_buoys(n), budget.clone()).record_history() }
    }

    fn layout(&self) -> Option<Layout> {
        self.evaluator.incumbent().map(|i| i.detail.layout.clone())
    }

    fn fitness(&self) -> Option<f64> {
        self.evaluator.incumbent().map(|i| i.fitness)
    }
}

/// Full HCCA run with an explicit optimizer pool.
pub fn hcca_run_with_pool(
    objective: &FarmObjective,
    budget: &EvalBudget,
    params: &HccaParams,
    mut pool: Vec<Box<dyn Optimizer>>,
    nm: &NmParams,
    rng: &mut RandomStream,
) -> Result<HccaOutcome> {
    params.validate()?;
    if pool.is_empty() {
        return Err(invalid("hcca pool is empty"));
    }
    let cfg = objective.config().clone();
    let nf = cfg.n_frequencies;
    let ids: Vec<String> = pool.iter().map(|o| o.id().to_string()).collect();
    let mut ledger = ContributionLedger::new(&ids)?;
    let mut stages: Vec<Stage> = Vec::new();
    let mut placements = Vec::new();
    let mut boa = Vec::new();
    let mut nm_opt = NelderMead::new(nm.clone());
    let mut shared = SharedPopulation::default();
    let mut buoy_pops: Vec<Population> = Vec::new();

    // First buoy.
    let (pos, pto) = place_first_buoy(&cfg, rng);
    let mut stage = Stage::new(objective, 1, budget);
    let first = Layout { positions: vec![pos], pto: vec![pto.clone()] };
    let first_eval = stage.evaluator.evaluate_detailed(&[first.to_flat()]);
    if !first_eval.is_empty() {
        let before = first_eval[0].fitness;
        let pto_group = VariableGroup::pto(0, nf);
        let (_, seeded, pop) = first_buoy_pto_tournament(
            &mut stage.evaluator,
            &pto_group.indices,
            &mut pool,
            params.tournament_budget,
            params.population,
            rng,
        )?;
        ledger = seeded;
        shared = SharedPopulation::unevaluated(pop.clone());
        buoy_pops.push(pop);
        let after = stage.fitness().unwrap_or(before);
        let layout = stage.layout().unwrap_or(first);
        placements.push(PlacementRecord {
            buoy: 0,
            candidates: Vec::new(),
            base: Layout { positions: Vec::new(), pto: Vec::new() },
            start_pto: pto,
            angle: None,
            radius: None,
            fallback: false,
            sampled_position: pos,
            final_position: layout.positions[0],
            pto_optimizer: "tournament".into(),
            pre_pto_fitness: before,
            post_pto_fitness: after,
            final_pto: layout.pto[0].clone(),
            final_fitness: after,
            evaluations: stage.evaluator.used(),
        });
        stages.push(stage);
    } else {
        stages.push(stage);
    }

    // Remaining buoys.
    for i in 1..cfg.n_buoys {
        let Some(base) = stages.last().and_then(Stage::layout) else { break };
        if budget.is_exhausted() {
            break;
        }
        let mut stage = Stage::new(objective, i + 1, budget);
        let record =
            place_next_buoy(&mut stage.evaluator, &base, &mut ledger, &mut pool, &mut nm_opt, &mut shared, params, rng)?;
        let evaluated = stage.evaluator.incumbent().is_some();
        if let Some(r) = record {
            placements.push(r);
        }
        if !evaluated {
            break;
        }
        buoy_pops.push(shared.members.clone());
        shared.context = None;
        stages.push(stage);
    }

    let placed = stages.last().and_then(Stage::layout).map_or(0, |l| l.n_buoys());
    let complete = placed == cfg.n_buoys;
    if complete && params.backtracking {
        let last = stages.last_mut().expect("complete farm has a stage");
        let mut global = SharedPopulation::unevaluated(concatenate(&buoy_pops, params.population));
        boa = backtracking(&mut last.evaluator, &ledger, &mut pool, &mut global, params, nm, rng)?;
    }

    let stage_evaluations = stages.iter().map(|s| s.evaluator.used()).collect();
    let mut incumbents = Vec::new();
    let mut best = None;
    let mut trace = Vec::new();
    let n_stages = stages.len();
    for (k, s) in stages.into_iter().enumerate() {
        let (inc, t, history) = s.evaluator.into_parts();
        incumbents.extend(history.unwrap_or_default().into_iter().map(|h| h.detail));
        if k + 1 == n_stages {
            best = inc.map(|i| i.detail);
            trace = t;
        }
    }
    Ok(HccaOutcome { best, complete, placed, trace, incumbents, placements, boa, ledger, stage_evaluations })
}

fn candidate_layout(base: &Layout, p: (f64, f64), pto: &PtoProfile) -> Layout {
    let mut l = base.clone();
    l.positions.push(p);
    l.pto.push(pto.clone());
    l
}

/// Evaluates the feasible candidates in order, filling in their fitness.
/// Returns the index of the best evaluated candidate.
fn evaluate_candidates(
    problem: &mut Evaluator<FarmObjective>,
    base: &Layout,
    pto: &PtoProfile,
    candidates: &mut [SampledCandidate],
) -> Option<usize> {
    let cfg = problem.objective().config().clone();
    let feasible: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| placement_feasible(c.position, &base.positions, &cfg))
        .map(|(i, _)| i)
        .collect();
    for &i in &feasible {
        candidates[i].feasible = true;
    }
    let xs: Vec<Vec<f64>> = feasible.iter().map(|&i| candidate_layout(base, candidates[i].position, pto).to_flat()).collect();
    let evals = problem.evaluate_detailed(&xs);
    let mut best: Option<usize> = None;
    for (&i, e) in feasible.iter().zip(&evals) {
        candidates[i].fitness = Some(e.fitness);
        if best.is_none_or(|b| e.fitness > candidates[b].fitness.unwrap_or(f64::NEG_INFINITY)) {
            best = Some(i);
        }
    }
    best
}

/// Places one more buoy next to the last buoy of `base`: sampling, PTO phase
/// with the ledger's favourite optimizer, then Nelder-Mead on the position.
/// `problem` must be a fresh evaluator for the enlarged farm. Returns `None`
/// if the budget ran out before any candidate was evaluated.
pub fn place_next_buoy(
    problem: &mut Evaluator<FarmObjective>,
    base: &Layout,
    ledger: &mut ContributionLedger,
    pool: &mut [Box<dyn Optimizer>],
    nm: &mut dyn Optimizer,
    shared: &mut SharedPopulation,
    params: &HccaParams,
    rng: &mut RandomStream,
) -> Result<Option<PlacementRecord>> {
    let cfg = problem.objective().config().clone();
    let nf = cfg.n_frequencies;
    let b = base.n_buoys();
    if b == 0 || b + 1 != cfg.n_buoys {
        return Err(invalid("place_next_buoy needs a fresh evaluator one buoy larger than the base farm"));
    }
    let prev = base.positions[b - 1];
    let start_pto = base.pto[b - 1].clone();
    let safe = cfg.safe_distance;

    let mut candidates: Vec<SampledCandidate> = match params.sampling {
        Sampling::Symmetric => params
            .angles
            .iter()
            .map(|&a| {
                let (p, r) = symmetric_sample(prev, a, safe, params.r_prime, rng);
                SampledCandidate::new(Some(a), Some(r), p, false)
            })
            .collect(),
        Sampling::Gaussian => (0..params.gaussian_samples)
            .map(|_| SampledCandidate::new(None, None, gaussian_sample(prev, params.gaussian_sigma, rng), false))
            .collect(),
    };
    let mut chosen = evaluate_candidates(problem, base, &start_pto, &mut candidates);

    if let (Some(c), Sampling::Symmetric) = (chosen, params.sampling) {
        if params.refine_angle > 0.0 {
            let angle = candidates[c].angle.expect("symmetric candidates carry an angle");
            let start = candidates.len();
            for a in [angle - params.refine_angle, angle + params.refine_angle] {
                let (p, r) = symmetric_sample(prev, a, safe, params.r_prime, rng);
                candidates.push(SampledCandidate::new(Some(a), Some(r), p, true));
            }
            if let Some(r) = evaluate_candidates(problem, base, &start_pto, &mut candidates[start..]) {
                let r = start + r;
                if candidates[r].fitness > candidates[c].fitness {
                    chosen = Some(r);
                }
            }
        }
    }

    let mut fallback = false;
    let (angle, radius, sampled) = match chosen {
        Some(c) => (candidates[c].angle, candidates[c].radius, candidates[c].position),
        None => {
            fallback = true;
            let p = random_feasible_position(&base.positions, &cfg, params.fallback_tries, rng);
            problem.evaluate_detailed(&[candidate_layout(base, p, &start_pto).to_flat()]);
            (None, None, p)
        }
    };
    let Some(pre) = problem.incumbent().map(|i| i.fitness) else { return Ok(None) };

    let pto_group = VariableGroup::pto(b, nf);
    let k = ledger.select();
    if !params.share_population {
        *shared = SharedPopulation::default();
    }
    let (before, after, _) =
        run_shared_phase(problem, &pto_group.indices, pool[k].as_mut(), shared, params.pto_budget, rng)?;
    let mut shift = Shift::from_initial(before);
    ledger.record_improvement(k, shift.improvement(before, after));
    let post_pto = problem.incumbent().map_or(pre, |i| i.fitness);
    let final_pto = problem.incumbent().expect("evaluated").detail.layout.pto[b].clone();

    let pos_group = VariableGroup::position(b, nf);
    if !problem.is_exhausted() {
        optimize_group(problem, &pos_group.indices, nm, params.nm_cap, rng)?;
    }
    let inc = problem.incumbent().expect("evaluated");

    Ok(Some(PlacementRecord {
        buoy: b,
        candidates,
        base: base.clone(),
        start_pto,
        angle,
        radius,
        fallback,
        sampled_position: sampled,
        final_position: inc.detail.layout.positions[b],
        pto_optimizer: ledger.entries()[k].id.clone(),
        pre_pto_fitness: pre,
        post_pto_fitness: post_pto,
        final_pto,
        final_fitness: inc.fitness,
        evaluations: problem.used(),
    }))
}
