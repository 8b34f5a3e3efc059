//! Seeded, repeated experiments over named algorithm presets, with CSV
//! result tables and convergence traces.

mod rank;
mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rank::{rank_table, RankRow};
pub use report::{
    read_convergence, read_convergence_csv, read_finals_csv, read_summary_csv, write_convergence,
    write_convergence_csv, write_finals_csv, write_summary_csv, FinalRow, PerturbationSummary, RunReport, Summary,
};

use crate::cooperative::{alternating_schedule, ccos_run, decompose_dims, Phase, VariableGroup};
use crate::domain::{clamp_to_bounds, make_farm_config, EvalBudget, RandomStream};
use crate::error::{Error, Result};
use crate::hcca::{hcca_run, write_placement_log, HccaParams, PlacementRecord};
use crate::model::{FarmObjective, WaveScenario};
use crate::optimizers::{build_optimizer, NelderMead, Optimizer, OptimizerParams};
use crate::problem::{Evaluator, Problem};

/// Named algorithm configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    De,
    Pso,
    /// Nelder-Mead restarted from the incumbent until the budget is spent.
    Nm,
    /// (1+1)-EA on all positions alternating with Nelder-Mead on all PTOs.
    Ea1p1Nm,
    Gwo,
    Agwo,
    /// AGWO on all PTOs alternating with Nelder-Mead on all positions.
    AgwoNm,
    /// Per-buoy cooperative search with a pool of two SLPSO instances.
    Slpso2,
    /// Per-buoy cooperative search with a pool of two SaNSDE instances.
    Sansde2,
    /// Per-buoy cooperative search choosing between SLPSO and SaNSDE.
    Ccos,
    Hcca,
    /// Incremental placement with Gaussian local sampling and Nelder-Mead.
    LsNm,
    /// Incremental placement with symmetric sampling, Nelder-Mead and
    /// backtracking.
    SlsNmB,
}

impl Algorithm {
    pub const ALL: [Algorithm; 13] = [
        Algorithm::De,
        Algorithm::Pso,
        Algorithm::Nm,
        Algorithm::Ea1p1Nm,
        Algorithm::Gwo,
        Algorithm::Agwo,
        Algorithm::AgwoNm,
        Algorithm::Slpso2,
        Algorithm::Sansde2,
        Algorithm::Ccos,
        Algorithm::Hcca,
        Algorithm::LsNm,
        Algorithm::SlsNmB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::De => "de",
            Algorithm::Pso => "pso",
            Algorithm::Nm => "nm",
            Algorithm::Ea1p1Nm => "ea1p1+nm",
            Algorithm::Gwo => "gwo",
            Algorithm::Agwo => "agwo",
            Algorithm::AgwoNm => "agwo+nm",
            Algorithm::Slpso2 => "slpso2",
            Algorithm::Sansde2 => "sansde2",
            Algorithm::Ccos => "ccos",
            Algorithm::Hcca => "hcca",
            Algorithm::LsNm => "ls-nm",
            Algorithm::SlsNmB => "sls-nm-b",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Algorithm::De => "differential evolution on the whole layout",
            Algorithm::Pso => "particle swarm on the whole layout",
            Algorithm::Nm => "Nelder-Mead restarted from the incumbent",
            Algorithm::Ea1p1Nm => "(1+1)-EA on positions alternating with Nelder-Mead on PTOs",
            Algorithm::Gwo => "grey wolf optimizer on the whole layout",
            Algorithm::Agwo => "adaptive chaotic grey wolf optimizer on the whole layout",
            Algorithm::AgwoNm => "AGWO on PTOs alternating with Nelder-Mead on positions",
            Algorithm::Slpso2 => "per-buoy cooperative search, pool of two SLPSO",
            Algorithm::Sansde2 => "per-buoy cooperative search, pool of two SaNSDE",
            Algorithm::Ccos => "per-buoy cooperative search selecting SLPSO or SaNSDE online",
            Algorithm::Hcca => "incremental placement, pooled PTO tuning and backtracking",
            Algorithm::LsNm => "incremental placement with Gaussian sampling and Nelder-Mead",
            Algorithm::SlsNmB => "incremental placement with symmetric sampling, Nelder-Mead and backtracking",
        }
    }

    /// Smallest budget the algorithm can use meaningfully.
    pub fn min_budget(self, params: &AlgorithmParams) -> u64 {
        let o = &params.optimizers;
        (match self {
            Algorithm::De => o.de.population,
            Algorithm::Pso => o.pso.population,
            Algorithm::Gwo => o.gwo.population,
            Algorithm::Agwo => o.agwo.population,
            _ => 1,
        }) as u64
    }

    fn hcca_params(self, base: &HccaParams) -> HccaParams {
        let preset = match self {
            Algorithm::LsNm => HccaParams::ls_nm(),
            Algorithm::SlsNmB => HccaParams::sls_nm_b(),
            _ => return base.clone(),
        };
        HccaParams {
            pool: preset.pool,
            sampling: preset.sampling,
            refine_angle: preset.refine_angle,
            worst_fraction: preset.worst_fraction,
            backtracking: preset.backtracking,
            ..base.clone()
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            Error::Config(format!("unknown algorithm '{s}', expected one of {names:?}"))
        })
    }
}

/// Budgets of the cooperative schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleParams {
    /// Per-phase budget of the alternating presets.
    pub cycle_budget: u64,
    /// Per-group budget of the cooperative presets.
    pub group_budget: u64,
    /// Generations of each (1+1)-EA position phase.
    pub ea_generations: u64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams { cycle_budget: 1000, group_budget: 500, ea_generations: 100 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    pub optimizers: OptimizerParams,
    pub hcca: HccaParams,
    pub schedule: ScheduleParams,
}

/// Unmetered position perturbations of each run's best layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationParams {
    pub count: usize,
    /// Standard deviation of each coordinate offset, metres.
    pub sigma: f64,
}

impl Default for PerturbationParams {
    fn default() -> Self {
        PerturbationParams { count: 100, sigma: 1.0 }
    }
}

/// An experiment: one algorithm, one scenario, repeated seeded runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `builtin:<name>` or a path to a scenario TOML file.
    pub scenario: String,
    /// Keep every `frequency_stride`-th frequency of the scenario.
    pub frequency_stride: usize,
    pub algorithm: String,
    pub n_buoys: usize,
    pub budget: u64,
    pub n_runs: usize,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Run repetitions concurrently.
    pub parallel_runs: bool,
    pub params: AlgorithmParams,
    pub perturbation: Option<PerturbationParams>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "builtin:perth".into(),
            frequency_stride: 1,
            algorithm: "hcca".into(),
            n_buoys: 4,
            budget: 20_000,
            n_runs: 10,
            base_seed: 1,
            output_dir: None,
            parallel_runs: true,
            params: AlgorithmParams::default(),
            perturbation: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        self.algorithm.parse()
    }

    pub fn validate(&self) -> Result<Algorithm> {
        let algorithm = self.algorithm()?;
        if self.n_runs < 1 {
            return Err(Error::Config("n_runs must be at least 1".into()));
        }
        if self.frequency_stride < 1 {
            return Err(Error::Config("frequency_stride must be at least 1".into()));
        }
        let min = algorithm.min_budget(&self.params);
        if self.budget < min {
            return Err(Error::Config(format!("budget {} is below the {min} evaluations {algorithm} needs", self.budget)));
        }
        if let Some(p) = &self.perturbation {
            if !(p.sigma >= 0.0) {
                return Err(Error::Config("perturbation sigma must be non-negative".into()));
            }
        }
        Ok(algorithm)
    }

    pub fn load_scenario(&self) -> Result<WaveScenario> {
        let scenario = match self.scenario.strip_prefix("builtin:") {
            Some(name) => WaveScenario::builtin(name),
            None => WaveScenario::load(Path::new(&self.scenario)),
        }
        .map_err(|e| Error::Config(format!("cannot load scenario '{}': {e}", self.scenario)))?;
        Ok(if self.frequency_stride > 1 { scenario.thinned(self.frequency_stride) } else { scenario })
    }

    pub fn objective(&self) -> Result<FarmObjective> {
        let scenario = self.load_scenario()?;
        let cfg = make_farm_config(self.n_buoys)?.with_frequencies(scenario.n_frequencies());
        FarmObjective::from_scenario(scenario, cfg)
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    /// Placement log of the incremental presets.
    pub placements: Vec<PlacementRecord>,
}

fn optimizer(id: &str, params: &AlgorithmParams) -> Result<Box<dyn Optimizer>> {
    build_optimizer(id, &params.optimizers)
}

fn repeated_nm(problem: &mut dyn Problem, params: &AlgorithmParams, rng: &mut RandomStream) {
    let mut nm = NelderMead::new(params.optimizers.nm.clone());
    while !problem.is_exhausted() {
        let before = problem.remaining();
        let start = problem.best();
        nm.optimize(problem, start.as_ref(), rng);
        if problem.remaining() == before {
            break;
        }
    }
}

fn alternating(
    problem: &mut dyn Problem,
    phases: Vec<(VariableGroup, Box<dyn Optimizer>)>,
    params: &AlgorithmParams,
    rng: &mut RandomStream,
) -> Result<()> {
    let mut phases: Vec<Phase> = phases.into_iter().map(|(group, optimizer)| Phase { group, optimizer }).collect();
    alternating_schedule(problem, &mut phases, params.schedule.cycle_budget, rng)?;
    Ok(())
}

/// Runs one algorithm once on `objective` with a fresh budget. The harness
/// itself evaluates nothing beyond the algorithm's own metered evaluations;
/// perturbation analysis is unmetered.
pub fn run_algorithm(
    objective: &FarmObjective,
    algorithm: Algorithm,
    params: &AlgorithmParams,
    budget: u64,
    seed: u64,
    perturbation: Option<&PerturbationParams>,
) -> Result<RunOutput> {
    let start = Instant::now();
    let eval_budget = EvalBudget::new(budget);
    let mut rng = RandomStream::new(seed, 0);
    let cfg = objective.config().clone();
    let (n, nf) = (cfg.n_buoys, cfg.n_frequencies);
    let mut placements = Vec::new();
    let (best, trace, complete) = match algorithm {
        Algorithm::Hcca | Algorithm::LsNm | Algorithm::SlsNmB => {
            let hp = algorithm.hcca_params(&params.hcca);
            let out = hcca_run(objective, &eval_budget, &hp, &params.optimizers, &mut rng)?;
            placements = out.placements;
            (out.best, out.trace, out.complete)
        }
        _ => {
            let mut ev = Evaluator::new(objective.clone(), eval_budget.clone());
            match algorithm {
                Algorithm::De | Algorithm::Pso | Algorithm::Gwo | Algorithm::Agwo => {
                    let mut opt = optimizer(algorithm.name(), params)?;
                    opt.optimize(&mut ev, None, &mut rng);
                }
                Algorithm::Nm => repeated_nm(&mut ev, params, &mut rng),
                Algorithm::Ea1p1Nm => {
                    let mut ea_params = params.optimizers.clone();
                    ea_params.ea1p1.generations = params.schedule.ea_generations;
                    let phases = vec![
                        (VariableGroup::all_positions(n, nf), build_optimizer("ea1p1", &ea_params)?),
                        (VariableGroup::all_ptos(n, nf), optimizer("nm", params)?),
                    ];
                    alternating(&mut ev, phases, params, &mut rng)?;
                }
                Algorithm::AgwoNm => {
                    let phases = vec![
                        (VariableGroup::all_ptos(n, nf), optimizer("agwo", params)?),
                        (VariableGroup::all_positions(n, nf), optimizer("nm", params)?),
                    ];
                    alternating(&mut ev, phases, params, &mut rng)?;
                }
                Algorithm::Slpso2 | Algorithm::Sansde2 | Algorithm::Ccos => {
                    let ids = match algorithm {
                        Algorithm::Slpso2 => ["slpso", "slpso"],
                        Algorithm::Sansde2 => ["sansde", "sansde"],
                        _ => ["slpso", "sansde"],
                    };
                    let mut pool = ids.iter().map(|id| optimizer(id, params)).collect::<Result<Vec<_>>>()?;
                    ccos_run(&mut ev, &decompose_dims(n, nf), &mut pool, params.schedule.group_budget, &mut rng)?;
                }
                Algorithm::Hcca | Algorithm::LsNm | Algorithm::SlsNmB => unreachable!(),
            }
            let (inc, trace, _) = ev.into_parts();
            (inc.map(|i| i.detail), trace, true)
        }
    };
    let perturbation = match (perturbation, &best) {
        (Some(p), Some(b)) => Some(perturb(objective, b, p, &RandomStream::new(seed, 1))?),
        _ => None,
    };
    let report = RunReport {
        algorithm: algorithm.name().to_string(),
        run: 0,
        seed,
        best_fitness: best.as_ref().map_or(f64::NAN, |b| b.fitness),
        best,
        trace,
        evaluations: eval_budget.consumed(),
        complete,
        wall_time_s: start.elapsed().as_secs_f64(),
        perturbation,
    };
    Ok(RunOutput { report, placements })
}

fn perturb(
    objective: &FarmObjective,
    best: &crate::model::EvaluatedLayout,
    p: &PerturbationParams,
    rng: &RandomStream,
) -> Result<PerturbationSummary> {
    let mut rng = rng.clone();
    let noise = Normal::new(0.0, p.sigma).map_err(|e| Error::Config(e.to_string()))?;
    let cfg = objective.with_buoys(best.layout.n_buoys()).config().clone();
    let target = objective.with_buoys(best.layout.n_buoys());
    let mut fitness = Vec::with_capacity(p.count);
    let mut feasible = 0;
    for _ in 0..p.count {
        let mut l = best.layout.clone();
        for pos in &mut l.positions {
            pos.0 += noise.sample(&mut rng);
            pos.1 += noise.sample(&mut rng);
        }
        let e = target.assess(&clamp_to_bounds(&l, &cfg))?;
        feasible += e.feasible as usize;
        fitness.push(e.fitness);
    }
    let improved = fitness.iter().filter(|&&f| f > best.fitness).count();
    let mean_fitness = if fitness.is_empty() { f64::NAN } else { fitness.iter().sum::<f64>() / fitness.len() as f64 };
    let max_fitness = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PerturbationSummary { count: p.count, sigma: p.sigma, improved, feasible, mean_fitness, max_fitness })
}

/// Result of a whole experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<RunOutput>,
    pub summary: Summary,
}

impl ExperimentResult {
    pub fn reports(&self) -> impl Iterator<Item = &RunReport> {
        self.runs.iter().map(|r| &r.report)
    }
}

/// Runs `n_runs` seeded repetitions (seed `base_seed + run`) and, if an
/// output directory is set, writes per-run convergence traces, best
/// layouts, placement logs, `finals.csv` and `summary.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let algorithm = cfg.validate()?;
    let objective = cfg.objective()?;
    let one = |run: usize| -> Result<RunOutput> {
        let mut out = run_algorithm(&objective, algorithm, &cfg.params, cfg.budget, cfg.seed(run), cfg.perturbation.as_ref())?;
        out.report.run = run;
        Ok(out)
    };
    let runs: Vec<RunOutput> = if cfg.parallel_runs {
        (0..cfg.n_runs).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.n_runs).map(one).collect::<Result<_>>()?
    };
    let finals: Vec<f64> = runs.iter().map(|r| r.report.best_fitness).collect();
    let summary = Summary::from_values(algorithm.name(), &finals)?;
    let result = ExperimentResult { runs, summary };
    if let Some(dir) = &cfg.output_dir {
        write_outputs(cfg, &result, dir)?;
    }
    Ok(result)
}

fn write_outputs(cfg: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    for out in &result.runs {
        let r = &out.report;
        write_convergence_csv(r, &dir.join(format!("convergence_run{:02}.csv", r.run)))?;
        if let Some(best) = &r.best {
            let text = toml::to_string(best).map_err(|e| Error::Config(e.to_string()))?;
            fs::write(dir.join(format!("best_layout_run{:02}.toml", r.run)), text)?;
        }
        if !out.placements.is_empty() {
            let f = fs::File::create(dir.join(format!("placements_run{:02}.csv", r.run)))?;
            write_placement_log(&out.placements, f)?;
        }
    }
    let rows: Vec<FinalRow> = result.reports().map(FinalRow::from).collect();
    write_finals_csv(&rows, &dir.join("finals.csv"))?;
    write_summary_csv(std::slice::from_ref(&result.summary), &dir.join("summary.csv"))?;
    let mut w = csv::Writer::from_path(dir.join("timings.csv"))?;
    w.write_record(["run", "seed", "wall_time_s"])?;
    for r in result.reports() {
        w.write_record([r.run.to_string(), r.seed.to_string(), format!("{:.3}", r.wall_time_s)])?;
    }
    w.flush()?;
    if cfg.perturbation.is_some() {
        let mut w = csv::Writer::from_path(dir.join("perturbation.csv"))?;
        w.write_record(["run", "seed", "count", "sigma", "improved", "feasible", "mean_fitness", "max_fitness"])?;
        for r in result.reports() {
            if let Some(p) = &r.perturbation {
                w.write_record([
                    r.run.to_string(),
                    r.seed.to_string(),
                    p.count.to_string(),
                    p.sigma.to_string(),
                    p.improved.to_string(),
                    p.feasible.to_string(),
                    p.mean_fitness.to_string(),
                    p.max_fitness.to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}
