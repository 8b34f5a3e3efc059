//! Standard test functions in their usual minimisation form. Wrap them as
//! `-f` to use them with the maximising optimizers.

use std::f64::consts::{E, PI};

use crate::domain::Bounds;
use crate::problem::FnObjective;

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cos.exp() + 20.0 + E
}

/// `-f` over a uniform box, ready for an [`Evaluator`](crate::Evaluator).
pub fn maximise(
    f: fn(&[f64]) -> f64,
    dim: usize,
    lower: f64,
    upper: f64,
) -> FnObjective<impl Fn(&[f64]) -> f64 + Sync> {
    FnObjective::new(Bounds::uniform(dim, lower, upper), move |x: &[f64]| -f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn optima_are_zero() {
        let z = [0.0; 7];
        assert_eq!(sphere(&z), 0.0);
        assert_abs_diff_eq!(rastrigin(&z), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ackley(&z), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn known_values() {
        assert_eq!(sphere(&[1.0, 2.0]), 5.0);
        assert_abs_diff_eq!(rastrigin(&[1.0, 0.0]), 1.0, epsilon = 1e-12);
        assert!(ackley(&[1.0, 1.0]) > 3.0);
    }
}
