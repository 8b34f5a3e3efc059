use serde::{Deserialize, Serialize};

use super::Optimizer;
use crate::domain::RandomStream;
use crate::problem::{Candidate, LocalBudget, Problem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmParams {
    /// Evaluation cap of one call, including the initial simplex.
    pub max_fun_evals: u64,
    /// Stop once both the fitness spread and the vertex spread fall below it.
    pub tolerance: f64,
    /// Initial simplex edge as a fraction of each dimension's range.
    pub initial_step: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NmParams {
    fn default() -> Self {
        NmParams {
            max_fun_evals: 100,
            tolerance: 1e-4,
            initial_step: 0.05,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

struct Simplex {
    xs: Vec<Vec<f64>>,
    fs: Vec<f64>,
}

impl Simplex {
    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.xs.len()).collect();
        idx.sort_by(|&a, &b| self.fs[b].total_cmp(&self.fs[a]));
        self.xs = idx.iter().map(|&i| self.xs[i].clone()).collect();
        self.fs = idx.iter().map(|&i| self.fs[i]).collect();
    }

    fn best(&self) -> Candidate {
        let i = super::argmax(&self.fs);
        Candidate::new(self.xs[i].clone(), self.fs[i])
    }

    fn converged(&self, tol: f64) -> bool {
        let (x0, f0) = (&self.xs[0], self.fs[0]);
        self.fs.iter().all(|f| (f0 - f).abs() <= tol)
            && self.xs.iter().all(|x| x.iter().zip(x0).all(|(a, b)| (a - b).abs() <= tol))
    }
}

/// Bounded Nelder-Mead simplex search from `start`, maximising. Trial points
/// are clamped into the box. `start_fitness` avoids re-evaluating a known
/// start. Returns the best vertex seen, or `None` if even the start could not
/// be evaluated.
pub fn nelder_mead(
    problem: &mut dyn Problem,
    start: &[f64],
    start_fitness: Option<f64>,
    params: &NmParams,
) -> Option<Candidate> {
    let bounds = problem.bounds().clone();
    let mut p = LocalBudget::new(problem, params.max_fun_evals);
    let n = start.len();
    let mut x0 = start.to_vec();
    bounds.clamp(&mut x0);
    let f0 = match start_fitness {
        Some(f) => f,
        None => p.evaluate(&x0)?,
    };

    let vertices: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut v = x0.clone();
            let step = params.initial_step * bounds.range(j);
            v[j] = if v[j] + step <= bounds.upper[j] { v[j] + step } else { v[j] - step };
            v
        })
        .collect();
    let values = p.evaluate_batch(&vertices);
    let mut simplex = Simplex { xs: vec![x0], fs: vec![f0] };
    let complete = values.len() == n;
    simplex.xs.extend(vertices.into_iter().take(values.len()));
    simplex.fs.extend(values);
    if !complete || n == 0 {
        return Some(simplex.best());
    }

    let point = |c: &[f64], toward: &[f64], t: f64| -> Vec<f64> {
        let mut y: Vec<f64> = c.iter().zip(toward).map(|(ci, wi)| ci + t * (wi - ci)).collect();
        bounds.clamp(&mut y);
        y
    };

    loop {
        simplex.sort();
        if simplex.converged(params.tolerance) {
            break;
        }
        let worst = simplex.xs[n].clone();
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex.xs[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let (f_best, f_second_worst, f_worst) = (simplex.fs[0], simplex.fs[n - 1], simplex.fs[n]);

        let xr = point(&centroid, &worst, -params.reflection);
        let Some(fr) = p.evaluate(&xr) else { break };
        let mut accepted = None;
        if fr > f_best {
            let xe = point(&centroid, &worst, -params.reflection * params.expansion);
            match p.evaluate(&xe) {
                Some(fe) if fe > fr => accepted = Some((xe, fe)),
                Some(_) => accepted = Some((xr, fr)),
                None => {
                    simplex.xs[n] = xr;
                    simplex.fs[n] = fr;
                    break;
                }
            }
        } else if fr > f_second_worst {
            accepted = Some((xr, fr));
        } else {
            let (xc, outside) = if fr > f_worst {
                (point(&centroid, &xr, params.contraction), true)
            } else {
                (point(&centroid, &worst, params.contraction), false)
            };
            let Some(fc) = p.evaluate(&xc) else { break };
            if (outside && fc >= fr) || (!outside && fc > f_worst) {
                accepted = Some((xc, fc));
            }
        }
        match accepted {
            Some((x, f)) => {
                simplex.xs[n] = x;
                simplex.fs[n] = f;
            }
            None => {
                let best = simplex.xs[0].clone();
                let shrunk: Vec<Vec<f64>> =
                    simplex.xs[1..].iter().map(|x| point(&best, x, params.shrink)).collect();
                let values = p.evaluate_batch(&shrunk);
                let done = values.len() < n;
                for (i, (x, f)) in shrunk.into_iter().zip(values).enumerate() {
                    simplex.xs[i + 1] = x;
                    simplex.fs[i + 1] = f;
                }
                if done {
                    break;
                }
            }
        }
    }
    Some(simplex.best())
}

/// Nelder-Mead as an [`Optimizer`]: one capped simplex search per call.
#[derive(Debug, Clone)]
pub struct NelderMead {
    params: NmParams,
}

impl NelderMead {
    pub fn new(params: NmParams) -> Self {
        NelderMead { params }
    }
}

impl Optimizer for NelderMead {
    fn id(&self) -> &str {
        "nm"
    }

    fn optimize(
        &mut self,
        problem: &mut dyn Problem,
        start: Option<&Candidate>,
        rng: &mut RandomStream,
    ) -> Option<Candidate> {
        let result = match start {
            Some(s) => nelder_mead(problem, &s.x, Some(s.f), &self.params),
            None => {
                let x = problem.bounds().sample(rng);
                nelder_mead(problem, &x, None, &self.params)
            }
        };
        match (result, start) {
            (Some(r), Some(s)) if s.f > r.f => Some(s.clone()),
            (r, s) => r.or_else(|| s.cloned()),
        }
    }
}
