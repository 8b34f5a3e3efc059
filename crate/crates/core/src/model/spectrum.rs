use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Two-parameter Bretschneider spectral density in m²·s.
///
/// `S(ω) = 5/16 · Hs² · ωp⁴ · ω⁻⁵ · exp(-5/4 · (ωp/ω)⁴)` with `ωp = 2π/Tp`.
/// A zero wave height gives a calm sea.
pub fn bretschneider_density(hs: f64, tp: f64, omega: f64) -> Result<f64> {
    if !(hs >= 0.0) || !(tp > 0.0) || !(omega > 0.0) {
        return Err(invalid(format!("Bretschneider needs Hs >= 0, Tp > 0, omega > 0 (got {hs}, {tp}, {omega})")));
    }
    let wp = 2.0 * PI / tp;
    let ratio = wp / omega;
    Ok(5.0 / 16.0 * hs * hs * wp.powi(4) / omega.powi(5) * (-1.25 * ratio.powi(4)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn peak_value() {
        let (hs, tp) = (2.5, 11.0);
        let wp = 2.0 * PI / tp;
        let expected = 5.0 / 16.0 * hs * hs / wp * (-1.25f64).exp();
        assert_relative_eq!(bretschneider_density(hs, tp, wp).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn calm_sea_is_zero() {
        for w in [0.1, 0.5, 1.0, 3.0] {
            assert_eq!(bretschneider_density(0.0, 9.0, w).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bretschneider_density(-1.0, 9.0, 1.0).is_err());
        assert!(bretschneider_density(1.0, 0.0, 1.0).is_err());
        assert!(bretschneider_density(1.0, 9.0, 0.0).is_err());
    }

    #[test]
    fn variance_matches_hs_squared_over_16() {
        // Composite Simpson quadrature over a dense grid.
        let (hs, tp) = (3.0, 10.0);
        let (a, b, n) = (0.05, 20.0, 200_000);
        let h = (b - a) / n as f64;
        let s = |w: f64| bretschneider_density(hs, tp, w).unwrap();
        let mut sum = s(a) + s(b);
        for i in 1..n {
            let w = a + i as f64 * h;
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * s(w);
        }
        let integral = sum * h / 3.0;
        assert_relative_eq!(integral, hs * hs / 16.0, max_relative = 0.01);
    }

    #[test]
    fn vanishes_at_both_ends() {
        assert!(bretschneider_density(2.0, 9.0, 1e-3).unwrap() < 1e-12);
        assert!(bretschneider_density(2.0, 9.0, 1e3).unwrap() < 1e-12);
    }
}
