use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Per-frequency hydrodynamic tables of one buoy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroCoefficients {
    /// Body mass in kg.
    pub body_mass: f64,
    /// Added mass A(ω) in kg.
    pub added_mass: Vec<f64>,
    /// Radiation damping B(ω) in N·s/m.
    pub radiation_damping: Vec<f64>,
    /// Excitation force amplitude per metre of wave amplitude, in N/m.
    pub excitation: Vec<f64>,
}

/// Hydrodynamic coefficients at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyCoefficients {
    pub mass: f64,
    pub added_mass: f64,
    pub radiation_damping: f64,
}

impl HydroCoefficients {
    pub fn at(&self, i: usize) -> BodyCoefficients {
        BodyCoefficients {
            mass: self.body_mass,
            added_mass: self.added_mass[i],
            radiation_damping: self.radiation_damping[i],
        }
    }

    pub fn validate(&self, n_frequencies: usize) -> Result<()> {
        if !(self.body_mass > 0.0) {
            return Err(invalid("body mass must be positive"));
        }
        let lens = [self.added_mass.len(), self.radiation_damping.len(), self.excitation.len()];
        if lens.iter().any(|&l| l != n_frequencies) {
            return Err(invalid(format!("hydro tables must have {n_frequencies} entries, got {lens:?}")));
        }
        if self.added_mass.iter().any(|a| !(*a >= 0.0)) || self.radiation_damping.iter().any(|b| !(*b >= 0.0)) {
            return Err(invalid("added mass and radiation damping must be non-negative"));
        }
        if self.excitation.iter().any(|f| !(*f >= 0.0)) {
            return Err(invalid("excitation amplitudes must be non-negative"));
        }
        Ok(())
    }
}

/// Mechanical impedance `(B + d) + j(ω(m + A) - k/ω)`.
fn impedance(omega: f64, c: &BodyCoefficients, k: f64, d: f64) -> Complex64 {
    Complex64::new(c.radiation_damping + d, omega * (c.mass + c.added_mass) - k / omega)
}

/// Mean power absorbed by a single spring-damper PTO in regular waves,
/// `P = ½ d |U|²` with `|U| = |F| / |Z(ω)|`.
pub fn single_body_power(omega: f64, coeffs: &BodyCoefficients, k: f64, d: f64, excitation: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(invalid("frequency must be positive"));
    }
    Ok(power_unchecked(omega, coeffs, k, d, excitation))
}

#[inline]
pub(crate) fn power_unchecked(omega: f64, coeffs: &BodyCoefficients, k: f64, d: f64, excitation: f64) -> f64 {
    let z = impedance(omega, coeffs, k, d).norm_sqr();
    0.5 * d * excitation * excitation / z
}
