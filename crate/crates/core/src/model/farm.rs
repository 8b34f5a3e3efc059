use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::body::{power_unchecked, BodyCoefficients};
use super::scenario::WaveScenario;
use crate::domain::{Bounds, FarmConfig, Layout};
use crate::error::{invalid, Result};
use crate::problem::{Evaluation, Objective};

/// Exponent of the safe-distance penalty `(Sum_dist + 1)^20`.
pub const PENALTY_EXPONENT: i32 = 20;

/// A layout together with its power breakdown and constraint status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedLayout {
    pub layout: Layout,
    /// Watts per buoy, summed over sea states, directions and frequencies.
    pub per_buoy_power: Vec<f64>,
    pub total_power: f64,
    /// Aggregate safe-distance shortfall in metres.
    pub sum_dist: f64,
    pub penalty: f64,
    /// `total_power - penalty`.
    pub fitness: f64,
    pub feasible: bool,
}

/// Sum over buoy pairs closer than `safe` of the shortfall `safe - dist`.
pub fn sum_distance_violation(positions: &[(f64, f64)], safe: f64) -> f64 {
    let mut total = 0.0;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let dist = (b.0 - a.0).hypot(b.1 - a.1);
            if dist < safe {
                total += safe - dist;
            }
        }
    }
    total
}

/// `0` for a feasible layout, `(sum_dist + 1)^20` otherwise.
pub fn penalty(sum_dist: f64) -> f64 {
    if sum_dist <= 0.0 {
        0.0
    } else {
        (sum_dist + 1.0).powi(PENALTY_EXPONENT)
    }
}

/// Scenario-level quantities precomputed for fast farm evaluation.
#[derive(Debug, Clone)]
pub struct FarmModel {
    scenario: WaveScenario,
    spectral_weights: Vec<f64>,
    coeffs: Vec<BodyCoefficients>,
    wavenumbers: Vec<f64>,
    /// `(weight, cos β, sin β)` per direction.
    directions: Vec<(f64, f64, f64)>,
}

impl FarmModel {
    pub fn new(scenario: WaveScenario) -> Result<Self> {
        scenario.validate()?;
        let spectral_weights = scenario.spectral_weights();
        let coeffs = (0..scenario.n_frequencies()).map(|i| scenario.hydro.at(i)).collect();
        let wavenumbers = scenario.frequencies.iter().map(|&w| scenario.interaction.wavenumber(w)).collect();
        let directions = scenario
            .directions
            .iter()
            .map(|d| {
                let b = d.angle_deg.to_radians();
                (d.weight, b.cos(), b.sin())
            })
            .collect();
        Ok(FarmModel { scenario, spectral_weights, coeffs, wavenumbers, directions })
    }

    pub fn scenario(&self) -> &WaveScenario {
        &self.scenario
    }

    /// Power of one isolated buoy with the given PTO profile.
    pub fn isolated_power(&self, stiffness: &[f64], damping: &[f64]) -> f64 {
        let s = &self.scenario;
        (0..s.n_frequencies())
            .map(|f| {
                self.spectral_weights[f]
                    * power_unchecked(s.frequencies[f], &self.coeffs[f], stiffness[f], damping[f], s.hydro.excitation[f])
            })
            .sum()
    }

    /// Evaluates a layout whose shape has already been checked.
    pub fn evaluate(&self, layout: &Layout, cfg: &FarmConfig) -> EvaluatedLayout {
        let n = layout.n_buoys();
        let nf = self.scenario.n_frequencies();
        let kernel = &self.scenario.interaction;

        // Direction-averaged coupling per buoy and frequency.
        let mut coupling = vec![0.0; n * nf];
        let mut paths = vec![0.0; self.directions.len()];
        for i in 0..n {
            for j in i + 1..n {
                let (pi, pj) = (layout.positions[i], layout.positions[j]);
                let (dx, dy) = (pj.0 - pi.0, pj.1 - pi.1);
                let r = dx.hypot(dy);
                // Coincident buoys take the r -> 0 limit of the kernel.
                let env = kernel.envelope(r);
                if env == 0.0 {
                    continue;
                }
                for (p, &(_, c, s)) in paths.iter_mut().zip(&self.directions) {
                    *p = r + (dx * c + dy * s).abs();
                }
                for f in 0..nf {
                    let kappa = self.wavenumbers[f];
                    let avg: f64 =
                        self.directions.iter().zip(&paths).map(|(&(w, _, _), &p)| w * (kappa * p).cos()).sum();
                    let q = env * avg;
                    coupling[i * nf + f] += q;
                    coupling[j * nf + f] += q;
                }
            }
        }

        let s = &self.scenario;
        let per_buoy_power: Vec<f64> = (0..n)
            .map(|i| {
                let pto = &layout.pto[i];
                (0..nf)
                    .map(|f| {
                        let base = power_unchecked(
                            s.frequencies[f],
                            &self.coeffs[f],
                            pto.stiffness[f],
                            pto.damping[f],
                            s.hydro.excitation[f],
                        );
                        self.spectral_weights[f] * base * (1.0 + coupling[i * nf + f])
                    })
                    .sum()
            })
            .collect();
        let total_power = per_buoy_power.iter().sum();
        let sum_dist = sum_distance_violation(&layout.positions, cfg.safe_distance);
        let penalty = penalty(sum_dist);
        EvaluatedLayout {
            layout: layout.clone(),
            per_buoy_power,
            total_power,
            sum_dist,
            penalty,
            fitness: total_power - penalty,
            feasible: sum_dist == 0.0 && layout.within_box(cfg),
        }
    }
}

/// Evaluates a farm layout under a wave scenario. Pure and unmetered; use a
/// [`FarmObjective`] behind an evaluator to charge a budget.
pub fn farm_power(layout: &Layout, scenario: &WaveScenario, cfg: &FarmConfig) -> Result<EvaluatedLayout> {
    check_compatible(scenario, cfg)?;
    layout.check_shape(cfg)?;
    Ok(FarmModel::new(scenario.clone())?.evaluate(layout, cfg))
}

fn check_compatible(scenario: &WaveScenario, cfg: &FarmConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.n_frequencies != scenario.n_frequencies() {
        return Err(invalid(format!(
            "farm expects {} PTO frequencies but the scenario has {}",
            cfg.n_frequencies,
            scenario.n_frequencies()
        )));
    }
    Ok(())
}

/// The farm power maximisation problem over the flat decision vector.
#[derive(Debug, Clone)]
pub struct FarmObjective {
    model: Arc<FarmModel>,
    cfg: FarmConfig,
}

impl FarmObjective {
    pub fn new(model: Arc<FarmModel>, cfg: FarmConfig) -> Result<Self> {
        check_compatible(model.scenario(), &cfg)?;
        Ok(FarmObjective { model, cfg })
    }

    pub fn from_scenario(scenario: WaveScenario, cfg: FarmConfig) -> Result<Self> {
        Self::new(Arc::new(FarmModel::new(scenario)?), cfg)
    }

    pub fn model(&self) -> &Arc<FarmModel> {
        &self.model
    }

    pub fn config(&self) -> &FarmConfig {
        &self.cfg
    }

    /// Same scenario, different buoy count.
    pub fn with_buoys(&self, n_buoys: usize) -> FarmObjective {
        FarmObjective { model: self.model.clone(), cfg: self.cfg.with_buoys(n_buoys) }
    }

    pub fn layout(&self, x: &[f64]) -> Layout {
        Layout::from_flat(x, self.cfg.n_frequencies).expect("decision vector matches the farm shape")
    }

    /// Unmetered evaluation for reporting and analysis.
    pub fn assess(&self, layout: &Layout) -> Result<EvaluatedLayout> {
        layout.check_shape(&self.cfg)?;
        Ok(self.model.evaluate(layout, &self.cfg))
    }
}

impl Objective for FarmObjective {
    type Detail = EvaluatedLayout;

    fn bounds(&self) -> Bounds {
        self.cfg.bounds()
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation<EvaluatedLayout> {
        let ev = self.model.evaluate(&self.layout(x), &self.cfg);
        Evaluation { fitness: ev.fitness, feasible: ev.feasible, detail: ev }
    }

    fn parallel(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_farm_config, PtoProfile};
    use crate::model::body::single_body_power;
    use crate::model::interaction::InteractionKernel;
    use crate::model::spectrum::bretschneider_density;
    use approx::assert_relative_eq;

    fn layout(positions: &[(f64, f64)], nf: usize) -> Layout {
        Layout { positions: positions.to_vec(), pto: vec![PtoProfile::uniform(nf, 2.0e5, 1.0e5); positions.len()] }
    }

    #[test]
    fn distance_violation_examples() {
        assert_eq!(sum_distance_violation(&[(0.0, 0.0), (40.0, 0.0)], 50.0), 10.0);
        assert_eq!(sum_distance_violation(&[(0.0, 0.0), (50.0, 0.0), (0.0, 80.0)], 50.0), 0.0);
        let h = 45.0 * 3f64.sqrt() / 2.0;
        let tri = [(0.0, 0.0), (45.0, 0.0), (22.5, h)];
        assert_relative_eq!(sum_distance_violation(&tri, 50.0), 15.0, epsilon = 1e-9);
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty(0.0), 0.0);
        assert_eq!(penalty(1.0), 1_048_576.0);
        assert_relative_eq!(penalty(10.0), 11f64.powi(20), max_relative = 1e-15);
        assert_relative_eq!(penalty(10.0), 6.7275e20, max_relative = 1e-4);
    }

    #[test]
    fn single_buoy_is_the_direct_weighted_integral() {
        let scenario = WaveScenario::builtin("perth").unwrap();
        let cfg = make_farm_config(1).unwrap();
        let mut l = layout(&[(70.0, 70.0)], 50);
        for (f, k) in l.pto[0].stiffness.iter_mut().enumerate() {
            *k = 1.0e4 * (f + 1) as f64;
        }
        let ev = farm_power(&l, &scenario, &cfg).unwrap();

        // Literal triple sum over sea states, directions and frequencies.
        let widths = scenario.bin_widths();
        let mut direct = 0.0;
        for s in &scenario.sea_states {
            for d in &scenario.directions {
                for (f, &w) in scenario.frequencies.iter().enumerate() {
                    let spec = bretschneider_density(s.hs, s.tp, w).unwrap();
                    let p = single_body_power(
                        w,
                        &scenario.hydro.at(f),
                        l.pto[0].stiffness[f],
                        l.pto[0].damping[f],
                        scenario.hydro.excitation[f],
                    )
                    .unwrap();
                    direct += s.weight * d.weight * 2.0 * widths[f] * spec * p;
                }
            }
        }
        assert_relative_eq!(ev.total_power, direct, max_relative = 1e-12);
        assert!(ev.feasible);
        assert_eq!(ev.fitness, ev.total_power);
    }

    #[test]
    fn far_apart_buoys_do_not_interact() {
        let scenario = WaveScenario::builtin("perth").unwrap();
        let mut cfg = make_farm_config(2).unwrap();
        cfg.side_length = 2000.0;
        let far = 10.0 * scenario.interaction.decay_length;
        let pair = farm_power(&layout(&[(0.0, 0.0), (far, 0.0)], 50), &scenario, &cfg).unwrap();
        let one = farm_power(&layout(&[(0.0, 0.0)], 50), &scenario, &cfg.with_buoys(1)).unwrap();
        assert_eq!(pair.total_power, 2.0 * one.total_power);
        assert_eq!(pair.per_buoy_power[0], one.total_power);
    }

    #[test]
    fn interaction_changes_power_when_close() {
        let scenario = WaveScenario::builtin("perth").unwrap();
        let cfg = make_farm_config(2).unwrap();
        let pair = farm_power(&layout(&[(0.0, 0.0), (60.0, 0.0)], 50), &scenario, &cfg).unwrap();
        let one = farm_power(&layout(&[(0.0, 0.0)], 50), &scenario, &cfg.with_buoys(1)).unwrap();
        assert!((pair.total_power - 2.0 * one.total_power).abs() > 1.0);
    }

    #[test]
    fn evaluated_layout_invariants() {
        let scenario = WaveScenario::builtin("perth").unwrap();
        let cfg = make_farm_config(3).unwrap();
        for positions in [[(10.0, 10.0), (30.0, 10.0), (200.0, 200.0)], [(10.0, 10.0), (100.0, 10.0), (200.0, 200.0)]] {
            let ev = farm_power(&layout(&positions, 50), &scenario, &cfg).unwrap();
            assert_relative_eq!(ev.total_power, ev.per_buoy_power.iter().sum::<f64>(), max_relative = 1e-15);
            assert_eq!(ev.feasible, ev.sum_dist == 0.0);
            assert_eq!(ev.fitness, ev.total_power - ev.penalty);
            assert_eq!(ev.penalty == 0.0, ev.sum_dist == 0.0);
        }
    }

    #[test]
    fn out_of_box_is_infeasible_but_unpenalised() {
        let scenario = WaveScenario::builtin("perth").unwrap();
        let cfg = make_farm_config(1).unwrap();
        let ev = farm_power(&layout(&[(-1.0, 10.0)], 50), &scenario, &cfg).unwrap();
        assert!(!ev.feasible);
        assert_eq!(ev.penalty, 0.0);
    }

    #[test]
    fn two_buoy_grid_argmax_matches_exhaustive_oracle() {
        let mut scenario = WaveScenario::builtin("perth").unwrap();
        scenario.interaction = InteractionKernel { amplitude: 0.3, decay_length: 80.0, wavenumber_scale: 1.0 };
        let cfg = make_farm_config(2).unwrap();
        let objective = FarmObjective::from_scenario(scenario.clone(), cfg.clone()).unwrap();
        let grid: Vec<(f64, f64)> =
            (0..5).flat_map(|i| (0..5).map(move |j| (60.0 + 40.0 * i as f64, 60.0 + 40.0 * j as f64))).collect();
        let anchor = (60.0, 60.0);
        // Oracle: the literal formula, evaluated independently per candidate.
        let oracle = |p: (f64, f64)| -> f64 {
            let l = layout(&[anchor, p], 50);
            let base = |i: usize| -> Vec<f64> {
                let w = scenario.spectral_weights();
                (0..50)
                    .map(|f| {
                        w[f] * single_body_power(
                            scenario.frequencies[f],
                            &scenario.hydro.at(f),
                            l.pto[i].stiffness[f],
                            l.pto[i].damping[f],
                            scenario.hydro.excitation[f],
                        )
                        .unwrap()
                    })
                    .collect()
            };
            let mut total = 0.0;
            for i in 0..2 {
                let b = base(i);
                let (me, other) = (l.positions[i], l.positions[1 - i]);
                for (f, &bf) in b.iter().enumerate() {
                    let q: f64 = scenario
                        .directions
                        .iter()
                        .map(|d| {
                            d.weight
                                * crate::model::interaction::interaction_factor(
                                    me,
                                    other,
                                    scenario.frequencies[f],
                                    d.angle_deg,
                                    &scenario.interaction,
                                )
                                .unwrap()
                        })
                        .sum();
                    total += bf * (1.0 + q);
                }
            }
            total - penalty(sum_distance_violation(&l.positions, 50.0))
        };
        let candidates: Vec<(f64, f64)> = grid.into_iter().filter(|&p| p != anchor).collect();
        let by_model = candidates
            .iter()
            .map(|&p| objective.assess(&layout(&[anchor, p], 50)).unwrap().fitness)
            .collect::<Vec<_>>();
        let by_oracle = candidates.iter().map(|&p| oracle(p)).collect::<Vec<_>>();
        let argmax = |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(argmax(&by_model), argmax(&by_oracle));
        for (a, b) in by_model.iter().zip(&by_oracle) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let scenario = WaveScenario::builtin("perth").unwrap();
        let cfg = make_farm_config(2).unwrap();
        assert!(farm_power(&layout(&[(0.0, 0.0)], 50), &scenario, &cfg).is_err());
        assert!(farm_power(&layout(&[(0.0, 0.0), (90.0, 0.0)], 10), &scenario, &cfg).is_err());
    }
}
