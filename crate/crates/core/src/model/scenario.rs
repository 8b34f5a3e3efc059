use std::path::Path;

use serde::{Deserialize, Serialize};

use super::body::HydroCoefficients;
use super::interaction::InteractionKernel;
use super::spectrum::bretschneider_density;
use crate::error::{invalid, Error, Result};

const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub angle_deg: f64,
    pub weight: f64,
}

/// One bin of the sea-state scatter diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeaState {
    /// Significant wave height in metres.
    pub hs: f64,
    /// Peak period in seconds.
    pub tp: f64,
    pub weight: f64,
}

/// Irregular directional wave climate and the hydrodynamic tables that
/// define the farm objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveScenario {
    pub name: String,
    /// Angular frequencies in rad/s, strictly increasing.
    pub frequencies: Vec<f64>,
    pub directions: Vec<Direction>,
    pub sea_states: Vec<SeaState>,
    pub hydro: HydroCoefficients,
    pub interaction: InteractionKernel,
    /// Depth of the buoy top below the surface. Informational only.
    #[serde(default = "default_submergence")]
    pub submergence_depth: f64,
}

fn default_submergence() -> f64 {
    8.0
}

/// Names accepted by [`WaveScenario::builtin`].
pub const BUILTIN_SCENARIOS: [&str; 4] = ["perth", "adelaide", "sydney", "tasmania"];

impl WaveScenario {
    pub fn n_frequencies(&self) -> usize {
        self.frequencies.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(invalid("scenario needs at least one frequency"));
        }
        if self.frequencies[0] <= 0.0 || self.frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("frequencies must be positive and strictly increasing"));
        }
        if self.directions.is_empty() || self.sea_states.is_empty() {
            return Err(invalid("scenario needs at least one direction and one sea state"));
        }
        let dir_sum: f64 = self.directions.iter().map(|d| d.weight).sum();
        if (dir_sum - 1.0).abs() > WEIGHT_TOLERANCE || self.directions.iter().any(|d| d.weight < 0.0) {
            return Err(invalid(format!("direction weights must be non-negative and sum to 1, got {dir_sum}")));
        }
        let state_sum: f64 = self.sea_states.iter().map(|s| s.weight).sum();
        if (state_sum - 1.0).abs() > WEIGHT_TOLERANCE || self.sea_states.iter().any(|s| s.weight < 0.0) {
            return Err(invalid(format!("sea-state weights must be non-negative and sum to 1, got {state_sum}")));
        }
        if self.sea_states.iter().any(|s| !(s.hs >= 0.0) || !(s.tp > 0.0)) {
            return Err(invalid("sea states need Hs >= 0 and Tp > 0"));
        }
        self.hydro.validate(self.frequencies.len())?;
        self.interaction.validate()
    }

    /// Width of the frequency bin around each grid point. A single-frequency
    /// scenario uses a unit bin.
    pub fn bin_widths(&self) -> Vec<f64> {
        let w = &self.frequencies;
        let n = w.len();
        if n == 1 {
            return vec![1.0];
        }
        (0..n)
            .map(|i| match i {
                0 => w[1] - w[0],
                i if i == n - 1 => w[n - 1] - w[n - 2],
                i => 0.5 * (w[i + 1] - w[i - 1]),
            })
            .collect()
    }

    /// Squared wave amplitude per frequency, `Σ_s w_s · 2 S_s(ω) Δω`,
    /// aggregated over the sea-state bins.
    pub fn spectral_weights(&self) -> Vec<f64> {
        let widths = self.bin_widths();
        self.frequencies
            .iter()
            .zip(&widths)
            .map(|(&w, &dw)| {
                self.sea_states
                    .iter()
                    .map(|s| s.weight * 2.0 * bretschneider_density(s.hs, s.tp, w).unwrap_or(0.0) * dw)
                    .sum()
            })
            .collect()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: WaveScenario =
            toml::from_str(text).map_err(|e| Error::Config(format!("cannot parse scenario: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialise scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    /// Bundled synthetic wave climates.
    pub fn builtin(name: &str) -> Result<Self> {
        let (states, dirs): (&[(f64, f64, f64)], &[(f64, f64)]) = match name {
            "perth" => (
                &[(1.5, 9.0, 0.3), (2.2, 11.0, 0.4), (3.0, 13.0, 0.2), (4.0, 14.0, 0.1)],
                &[(210.0, 0.1), (225.0, 0.25), (232.5, 0.3), (240.0, 0.25), (255.0, 0.1)],
            ),
            "adelaide" => (
                &[(1.2, 10.0, 0.35), (2.0, 12.0, 0.45), (3.0, 14.0, 0.2)],
                &[(225.0, 0.2), (240.0, 0.5), (255.0, 0.3)],
            ),
            "sydney" => (
                &[(1.0, 8.0, 0.3), (1.6, 10.0, 0.4), (2.4, 11.0, 0.2), (3.2, 12.0, 0.1)],
                &[(90.0, 0.1), (112.5, 0.2), (135.0, 0.3), (157.5, 0.25), (180.0, 0.15)],
            ),
            "tasmania" => (
                &[(2.0, 11.0, 0.2), (3.0, 13.0, 0.4), (4.0, 14.0, 0.3), (5.0, 15.0, 0.1)],
                &[(247.5, 0.3), (270.0, 0.5), (292.5, 0.2)],
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown builtin scenario '{other}', expected one of {BUILTIN_SCENARIOS:?}"
                )))
            }
        };
        let n = 50;
        let frequencies: Vec<f64> = (0..n).map(|i| 0.25 + 1.25 * i as f64 / (n - 1) as f64).collect();
        Ok(WaveScenario {
            name: name.to_string(),
            hydro: synthetic_hydro(&frequencies),
            frequencies,
            directions: dirs.iter().map(|&(angle_deg, weight)| Direction { angle_deg, weight }).collect(),
            sea_states: states.iter().map(|&(hs, tp, weight)| SeaState { hs, tp, weight }).collect(),
            interaction: InteractionKernel { amplitude: 0.15, decay_length: 60.0, wavenumber_scale: 1.0 },
            submergence_depth: default_submergence(),
        })
    }

    /// One frequency, one sea state peaked at that frequency, one direction.
    pub fn single_frequency(omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(invalid("frequency must be positive"));
        }
        let frequencies = vec![omega];
        Ok(WaveScenario {
            name: format!("single-{omega}"),
            hydro: synthetic_hydro(&frequencies),
            frequencies,
            directions: vec![Direction { angle_deg: 0.0, weight: 1.0 }],
            sea_states: vec![SeaState { hs: 2.0, tp: 2.0 * std::f64::consts::PI / omega, weight: 1.0 }],
            interaction: InteractionKernel { amplitude: 0.15, decay_length: 60.0, wavenumber_scale: 1.0 },
            submergence_depth: default_submergence(),
        })
    }

    /// Same climate restricted to every `stride`-th frequency.
    pub fn thinned(&self, stride: usize) -> Self {
        let keep: Vec<usize> = (0..self.frequencies.len()).step_by(stride.max(1)).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        WaveScenario {
            name: format!("{}-every-{stride}", self.name),
            frequencies: pick(&self.frequencies),
            hydro: HydroCoefficients {
                body_mass: self.hydro.body_mass,
                added_mass: pick(&self.hydro.added_mass),
                radiation_damping: pick(&self.hydro.radiation_damping),
                excitation: pick(&self.hydro.excitation),
            },
            ..self.clone()
        }
    }
}

/// Smooth, plausible tables for a fully submerged spherical buoy.
///
/// Radiation damping peaks at 1 rad/s; excitation follows a Haskind-like
/// `|F|² ∝ B/ω³` shape.
pub fn synthetic_hydro(frequencies: &[f64]) -> HydroCoefficients {
    const MASS: f64 = 2.5e5;
    const A0: f64 = 1.6e5;
    const B0: f64 = 1.2e5;
    const F0: f64 = 1.15e5;
    let damping = |w: f64| B0 * w.powi(3) * (1.5 * (1.0 - w * w)).exp();
    HydroCoefficients {
        body_mass: MASS,
        added_mass: frequencies.iter().map(|&w| A0 * (1.0 + 0.25 * (-((w - 0.9) / 0.35).powi(2)).exp())).collect(),
        radiation_damping: frequencies.iter().map(|&w| damping(w)).collect(),
        excitation: frequencies.iter().map(|&w| F0 * (damping(w) / B0).sqrt() / w.powf(1.5)).collect(),
    }
}
