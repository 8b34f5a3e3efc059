use std::io::Write;

use super::farm::FarmModel;
use super::scenario::WaveScenario;
use crate::domain::{make_farm_config, Layout, PtoProfile};
use crate::error::{invalid, Result};

/// Uniform (k, d) grid of single-buoy power, the same setting applied to
/// every frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PtoLandscape {
    pub stiffness: Vec<f64>,
    pub damping: Vec<f64>,
    /// `power[i][j]` is the power at `(stiffness[i], damping[j])`.
    pub power: Vec<Vec<f64>>,
}

fn axis(range: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(step > 0.0) {
        return Err(invalid("scan step must be positive"));
    }
    if !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("empty scan range [{lo}, {hi}]")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// Scans single-buoy power over uniform PTO settings.
pub fn scan_pto_landscape(
    scenario: &WaveScenario,
    k_range: (f64, f64),
    d_range: (f64, f64),
    step: (f64, f64),
) -> Result<PtoLandscape> {
    let stiffness = axis(k_range, step.0)?;
    let damping = axis(d_range, step.1)?;
    let model = FarmModel::new(scenario.clone())?;
    let nf = scenario.n_frequencies();
    let cfg = make_farm_config(1)?.with_frequencies(nf);
    let centre = cfg.side_length / 2.0;
    let power = stiffness
        .iter()
        .map(|&k| {
            damping
                .iter()
                .map(|&d| {
                    let layout = Layout { positions: vec![(centre, centre)], pto: vec![PtoProfile::uniform(nf, k, d)] };
                    model.evaluate(&layout, &cfg).total_power
                })
                .collect()
        })
        .collect();
    Ok(PtoLandscape { stiffness, damping, power })
}

impl PtoLandscape {
    /// `(k, d, power)` of the best grid point.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (self.stiffness[0], self.damping[0], f64::NEG_INFINITY);
        for (i, row) in self.power.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > best.2 {
                    best = (self.stiffness[i], self.damping[j], p);
                }
            }
        }
        best
    }

    /// Writes `k,d,power_watts` rows, stiffness-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "d", "power_watts"])?;
        for (i, row) in self.power.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                w.write_record([self.stiffness[i].to_string(), self.damping[j].to_string(), p.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
