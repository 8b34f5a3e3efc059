use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use wecopt_core::harness::{rank_table, read_finals_csv, Algorithm, ExperimentConfig};
use wecopt_core::model::scan_pto_landscape;
use wecopt_core::FarmConfig;

/// Wave energy converter farm layout and PTO optimization.
#[derive(Parser)]
#[command(name = "wecopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Directory for result files; overrides the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Overrides the algorithm preset.
        #[arg(short, long)]
        algorithm: Option<String>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Run seeds one after another instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Write single-buoy power over a (k, d) grid as CSV.
    Scan {
        /// `builtin:<name>` or a scenario TOML file.
        #[arg(long, default_value = "builtin:perth")]
        scenario: String,
        /// Keep every n-th frequency.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = FarmConfig::DEFAULT_STIFFNESS_BOUNDS[0])]
        k_min: f64,
        #[arg(long, default_value_t = FarmConfig::DEFAULT_STIFFNESS_BOUNDS[1])]
        k_max: f64,
        #[arg(long, default_value_t = 1.0e4)]
        k_step: f64,
        #[arg(long, default_value_t = FarmConfig::DEFAULT_DAMPING_BOUNDS[0])]
        d_min: f64,
        #[arg(long, default_value_t = FarmConfig::DEFAULT_DAMPING_BOUNDS[1])]
        d_max: f64,
        #[arg(long, default_value_t = 1.0e4)]
        d_step: f64,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Mean ranks of algorithms from result directories holding finals.csv.
    Rank {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
    /// List the algorithm presets.
    Presets,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, output, algorithm, runs, seed, budget, sequential } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if output.is_some() {
                cfg.output_dir = output;
            }
            if let Some(a) = algorithm {
                cfg.algorithm = a;
            }
            if let Some(n) = runs {
                cfg.n_runs = n;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(b) = budget {
                cfg.budget = b;
            }
            if sequential {
                cfg.parallel_runs = false;
            }
            let result = wecopt_core::harness::run_experiment(&cfg)?;
            let mut out = io::stdout().lock();
            writeln!(out, "run,seed,best_fitness_watts,evaluations,complete")?;
            for r in result.reports() {
                writeln!(out, "{},{},{},{},{}", r.run, r.seed, r.best_fitness, r.evaluations, r.complete)?;
            }
            let s = &result.summary;
            writeln!(
                out,
                "# {} over {} runs: max {:.1} min {:.1} mean {:.1} median {:.1} std {:.1}",
                s.algorithm, s.n_runs, s.max, s.min, s.mean, s.median, s.std
            )?;
        }
        Command::Scan { scenario, stride, k_min, k_max, k_step, d_min, d_max, d_step, output } => {
            let cfg = ExperimentConfig { scenario, frequency_stride: stride, ..ExperimentConfig::default() };
            let scenario = cfg.load_scenario()?;
            let scan = scan_pto_landscape(&scenario, (k_min, k_max), (d_min, d_max), (k_step, d_step))?;
            match output {
                Some(path) => {
                    let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                    scan.write_csv(f)?
                }
                None => scan.write_csv(io::stdout().lock())?,
            }
        }
        Command::Rank { dirs } => {
            let mut samples: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
            for dir in &dirs {
                let path = dir.join("finals.csv");
                let rows = read_finals_csv(&path).with_context(|| format!("cannot read {}", path.display()))?;
                for row in rows {
                    samples.entry(row.algorithm).or_default().push((row.run, row.best_fitness));
                }
            }
            if samples.len() < 2 {
                bail!("ranking needs results of at least two algorithms, found {}", samples.len());
            }
            let samples: Vec<(String, Vec<f64>)> = samples
                .into_iter()
                .map(|(name, mut v)| {
                    v.sort_by_key(|&(run, _)| run);
                    (name, v.into_iter().map(|(_, f)| f).collect())
                })
                .collect();
            let mut out = io::stdout().lock();
            writeln!(out, "algorithm,mean_rank")?;
            for row in rank_table(&samples)? {
                writeln!(out, "{},{}", row.algorithm, row.mean_rank)?;
            }
        }
        Command::Presets => {
            let mut out = io::stdout().lock();
            for a in Algorithm::ALL {
                writeln!(out, "{:<10} {}", a.name(), a.description())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
