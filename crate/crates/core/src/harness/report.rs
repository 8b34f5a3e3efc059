use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::EvaluatedLayout;
use crate::problem::TracePoint;

/// Outcome of one seeded run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub algorithm: String,
    pub run: usize,
    pub seed: u64,
    pub best: Option<EvaluatedLayout>,
    pub best_fitness: f64,
    /// Improvement events as (global evaluation count, best so far).
    pub trace: Vec<TracePoint>,
    /// Evaluations charged to the run.
    pub evaluations: u64,
    /// False when an incremental method ran out of budget before placing
    /// every buoy.
    pub complete: bool,
    pub wall_time_s: f64,
    pub perturbation: Option<PerturbationSummary>,
}

impl RunReport {
    /// Trace rows with a closing row at the final evaluation count.
    pub fn convergence_rows(&self) -> Vec<TracePoint> {
        let mut rows = self.trace.clone();
        if let Some(last) = rows.last().copied() {
            if self.evaluations > last.evals {
                rows.push(TracePoint { evals: self.evaluations, best_fitness: last.best_fitness });
            }
        }
        rows
    }
}

/// Fitness of random position perturbations of a run's best layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSummary {
    pub count: usize,
    pub sigma: f64,
    /// Perturbations with higher fitness than the reported best.
    pub improved: usize,
    pub feasible: usize,
    pub mean_fitness: f64,
    pub max_fitness: f64,
}

#[derive(Serialize, Deserialize)]
struct ConvergenceRow {
    evals: u64,
    best_fitness_watts: f64,
}

pub fn write_convergence<W: Write>(rows: &[TracePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in rows {
        w.serialize(ConvergenceRow { evals: p.evals, best_fitness_watts: p.best_fitness })?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `evals,best_fitness_watts` rows: every improvement plus a
/// closing row at the final evaluation count.
pub fn write_convergence_csv(report: &RunReport, path: &Path) -> Result<()> {
    write_convergence(&report.convergence_rows(), File::create(path)?)
}

pub fn read_convergence<R: Read>(input: R) -> Result<Vec<TracePoint>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        let row: ConvergenceRow = row?;
        rows.push(TracePoint { evals: row.evals, best_fitness: row.best_fitness_watts });
    }
    Ok(rows)
}

pub fn read_convergence_csv(path: &Path) -> Result<Vec<TracePoint>> {
    read_convergence(File::open(path)?)
}

/// Distribution of final fitness over runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub n_runs: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
}

impl Summary {
    pub fn from_values(algorithm: &str, values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("summary needs at least one value"));
        }
        let n = values.len();
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Summary { algorithm: algorithm.to_string(), n_runs: n, max: sorted[n - 1], min: sorted[0], mean, median, std })
    }
}

pub fn write_summary_csv(summaries: &[Summary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in summaries {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<Summary>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// One row of `finals.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    pub algorithm: String,
    pub run: usize,
    pub seed: u64,
    pub best_fitness: f64,
    pub total_power: f64,
    pub feasible: bool,
    pub evaluations: u64,
    pub complete: bool,
}

impl From<&RunReport> for FinalRow {
    fn from(r: &RunReport) -> Self {
        FinalRow {
            algorithm: r.algorithm.clone(),
            run: r.run,
            seed: r.seed,
            best_fitness: r.best_fitness,
            total_power: r.best.as_ref().map_or(f64::NAN, |b| b.total_power),
            feasible: r.best.as_ref().is_some_and(|b| b.feasible),
            evaluations: r.evaluations,
            complete: r.complete,
        }
    }
}

pub fn write_finals_csv(rows: &[FinalRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_finals_csv(path: &Path) -> Result<Vec<FinalRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}
