use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const GRAVITY: f64 = 9.81;

/// Parameters of the signed, distance-decaying inter-buoy coupling.
///
/// The factor for a pair at separation `r` in wave direction `β` is
/// `q₀ · exp(-r/L) · cos(κ(r + |Δ·e_β|))`, with `κ = scale · ω²/g` and
/// `Δ` the displacement between the buoys. It vanishes for `r ≥ 10 L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionKernel {
    pub amplitude: f64,
    pub decay_length: f64,
    pub wavenumber_scale: f64,
}

impl InteractionKernel {
    pub const CUTOFF_LENGTHS: f64 = 10.0;

    pub fn off() -> Self {
        InteractionKernel { amplitude: 0.0, decay_length: 1.0, wavenumber_scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.amplitude) {
            return Err(invalid("interaction amplitude must lie in [0, 1]"));
        }
        if !(self.decay_length > 0.0) {
            return Err(invalid("interaction decay length must be positive"));
        }
        Ok(())
    }

    pub fn cutoff(&self) -> f64 {
        Self::CUTOFF_LENGTHS * self.decay_length
    }

    pub fn wavenumber(&self, omega: f64) -> f64 {
        self.wavenumber_scale * omega * omega / GRAVITY
    }

    /// Distance envelope `q₀ exp(-r/L)`, zero beyond the cutoff.
    #[inline]
    pub(crate) fn envelope(&self, r: f64) -> f64 {
        if r >= self.cutoff() || self.amplitude == 0.0 {
            0.0
        } else {
            self.amplitude * (-r / self.decay_length).exp()
        }
    }

    /// Phase path `r + |Δ·e_β|`; multiply by the wavenumber.
    #[inline]
    pub(crate) fn path(dx: f64, dy: f64, r: f64, (cos_b, sin_b): (f64, f64)) -> f64 {
        r + (dx * cos_b + dy * sin_b).abs()
    }
}

/// Coupling factor between buoys `i` and `j`. Symmetric, translation
/// invariant and bounded by `q₀ exp(-dist/L)`.
pub fn interaction_factor(
    pos_i: (f64, f64),
    pos_j: (f64, f64),
    omega: f64,
    beta_deg: f64,
    kernel: &InteractionKernel,
) -> Result<f64> {
    let (dx, dy) = (pos_j.0 - pos_i.0, pos_j.1 - pos_i.1);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(invalid("interaction between coincident buoys is undefined"));
    }
    let env = kernel.envelope(r);
    if env == 0.0 {
        return Ok(0.0);
    }
    let beta = beta_deg.to_radians();
    let path = InteractionKernel::path(dx, dy, r, (beta.cos(), beta.sin()));
    Ok(env * (kernel.wavenumber(omega) * path).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const K: InteractionKernel = InteractionKernel { amplitude: 0.2, decay_length: 40.0, wavenumber_scale: 1.0 };

    #[test]
    fn hard_cutoff() {
        assert_eq!(interaction_factor((0.0, 0.0), (400.0, 0.0), 0.7, 0.0, &K).unwrap(), 0.0);
        assert_ne!(interaction_factor((0.0, 0.0), (399.0, 0.0), 0.7, 0.0, &K).unwrap(), 0.0);
    }

    #[test]
    fn kernel_off_is_zero() {
        let k = InteractionKernel { amplitude: 0.0, ..K };
        assert_eq!(interaction_factor((0.0, 0.0), (60.0, 10.0), 0.7, 30.0, &k).unwrap(), 0.0);
    }

    #[test]
    fn coincident_is_rejected() {
        assert!(interaction_factor((3.0, 3.0), (3.0, 3.0), 0.7, 0.0, &K).is_err());
    }

    #[test]
    fn kernel_is_signed() {
        let values: Vec<f64> = (1..200)
            .map(|i| interaction_factor((0.0, 0.0), (50.0 + i as f64, 0.0), 0.9, 90.0, &K).unwrap())
            .collect();
        assert!(values.iter().any(|&v| v > 0.0));
        assert!(values.iter().any(|&v| v < 0.0));
    }

    proptest! {
        #[test]
        fn symmetric_translation_invariant_and_bounded(
            xi in -500.0..500.0f64, yi in -500.0..500.0f64,
            dx in -300.0..300.0f64, dy in -300.0..300.0f64,
            tx in -1000.0..1000.0f64, ty in -1000.0..1000.0f64,
            omega in 0.2..2.0f64, beta in 0.0..360.0f64,
        ) {
            prop_assume!(dx.hypot(dy) > 1e-6);
            let a = (xi, yi);
            let b = (xi + dx, yi + dy);
            let q = interaction_factor(a, b, omega, beta, &K).unwrap();
            prop_assert_eq!(q, interaction_factor(b, a, omega, beta, &K).unwrap());
            let shifted = interaction_factor((a.0 + tx, a.1 + ty), (b.0 + tx, b.1 + ty), omega, beta, &K).unwrap();
            prop_assert!((q - shifted).abs() <= 1e-9);
            prop_assert!(q.abs() <= K.amplitude * (-dx.hypot(dy) / K.decay_length).exp() + 1e-15);
        }
    }
}
