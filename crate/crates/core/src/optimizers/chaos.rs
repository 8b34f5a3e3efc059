use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Deterministic recurrences used to perturb the AGWO control parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaoticMap {
    Chebyshev,
    Circle,
    Gauss,
    Iterative,
    Logistic,
    Piecewise,
    Sine,
    Singer,
    Sinusoidal,
    Tent,
}

impl ChaoticMap {
    pub const ALL: [ChaoticMap; 10] = [
        ChaoticMap::Chebyshev,
        ChaoticMap::Circle,
        ChaoticMap::Gauss,
        ChaoticMap::Iterative,
        ChaoticMap::Logistic,
        ChaoticMap::Piecewise,
        ChaoticMap::Sine,
        ChaoticMap::Singer,
        ChaoticMap::Sinusoidal,
        ChaoticMap::Tent,
    ];

    /// Closed interval that contains every iterate.
    pub fn range(self) -> (f64, f64) {
        match self {
            ChaoticMap::Chebyshev | ChaoticMap::Iterative => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChaoticMap::Chebyshev => "chebyshev",
            ChaoticMap::Circle => "circle",
            ChaoticMap::Gauss => "gauss",
            ChaoticMap::Iterative => "iterative",
            ChaoticMap::Logistic => "logistic",
            ChaoticMap::Piecewise => "piecewise",
            ChaoticMap::Sine => "sine",
            ChaoticMap::Singer => "singer",
            ChaoticMap::Sinusoidal => "sinusoidal",
            ChaoticMap::Tent => "tent",
        }
    }

    fn contains(self, x: f64) -> bool {
        let (lo, hi) = self.range();
        x >= lo && x <= hi
    }
}

impl std::str::FromStr for ChaoticMap {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        ChaoticMap::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| invalid(format!("unknown chaotic map '{s}'")))
    }
}

const CIRCLE_A: f64 = 0.5;
const CIRCLE_B: f64 = 0.2;
const ITERATIVE_A: f64 = 0.7;
const LOGISTIC_A: f64 = 4.0;
const PIECEWISE_P: f64 = 0.4;
const SINE_A: f64 = 4.0;
const SINGER_MU: f64 = 1.07;
const SINUSOIDAL_A: f64 = 2.3;
const TENT_SPLIT: f64 = 0.7;
const ROUNDING_SLACK: f64 = 1e-12;

/// Next iterate of `map` from `x`. `step` is the 1-based index of the
/// iterate being produced; only the Chebyshev map depends on it.
pub fn chaotic_next(map: ChaoticMap, x: f64, step: u64) -> Result<f64> {
    if !map.contains(x) {
        let (lo, hi) = map.range();
        return Err(invalid(format!("{} state {x} outside [{lo}, {hi}]", map.name())));
    }
    let next = match map {
        ChaoticMap::Chebyshev => (step as f64 * x.acos()).cos(),
        ChaoticMap::Circle => (x + CIRCLE_B - CIRCLE_A / (2.0 * PI) * (2.0 * PI * x).sin()).rem_euclid(1.0),
        ChaoticMap::Gauss => {
            if x == 0.0 {
                1.0
            } else {
                (1.0 / x).rem_euclid(1.0)
            }
        }
        ChaoticMap::Iterative => {
            if x == 0.0 {
                ITERATIVE_A
            } else {
                (ITERATIVE_A * PI / x).sin()
            }
        }
        ChaoticMap::Logistic => LOGISTIC_A * x * (1.0 - x),
        ChaoticMap::Piecewise => {
            let p = PIECEWISE_P;
            if x < p {
                x / p
            } else if x < 0.5 {
                (x - p) / (0.5 - p)
            } else if x < 1.0 - p {
                (1.0 - p - x) / (0.5 - p)
            } else {
                (1.0 - x) / p
            }
        }
        ChaoticMap::Sine => SINE_A / 4.0 * (PI * x).sin(),
        ChaoticMap::Singer => {
            SINGER_MU * (7.86 * x - 23.31 * x.powi(2) + 28.75 * x.powi(3) - 13.302875 * x.powi(4))
        }
        ChaoticMap::Sinusoidal => SINUSOIDAL_A * x * x * (PI * x).sin(),
        ChaoticMap::Tent => {
            if x < TENT_SPLIT {
                x / TENT_SPLIT
            } else {
                10.0 / 3.0 * (1.0 - x)
            }
        }
    };
    let (lo, hi) = map.range();
    if !(next >= lo - ROUNDING_SLACK && next <= hi + ROUNDING_SLACK) {
        return Err(invalid(format!("{} iterate {next} escaped its range", map.name())));
    }
    // Rounding can land boundary values an ulp outside the range.
    Ok(next.clamp(lo, hi))
}

/// Stateful iteration of a chaotic map.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequence {
    map: ChaoticMap,
    x0: f64,
    x: f64,
    step: u64,
}

impl ChaoticSequence {
    pub fn new(map: ChaoticMap, x0: f64) -> Result<Self> {
        if !map.contains(x0) {
            return Err(invalid(format!("initial state {x0} outside the {} range", map.name())));
        }
        Ok(ChaoticSequence { map, x0, x: x0, step: 0 })
    }

    pub fn state(&self) -> f64 {
        self.x
    }

    pub fn next_value(&mut self) -> f64 {
        self.step += 1;
        self.x = chaotic_next(self.map, self.x, self.step).expect("iterates stay in range");
        self.x
    }

    pub fn reset(&mut self) {
        self.x = self.x0;
        self.step = 0;
    }
}
