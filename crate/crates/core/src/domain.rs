//! Farm geometry, decision vectors, evaluation budgets and random streams.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Farm area per buoy in square metres; the farm side is `sqrt(N * 20000)`.
pub const AREA_PER_BUOY: f64 = 20_000.0;

/// Geometry and box bounds of a farm of `n_buoys` converters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmConfig {
    pub n_buoys: usize,
    /// Side of the square farm in metres.
    pub side_length: f64,
    /// Minimum pairwise buoy separation in metres.
    pub safe_distance: f64,
    /// `[d_l, d_u]` in N·s/m.
    pub pto_damping_bounds: [f64; 2],
    /// `[k_l, k_u]` in N/m.
    pub pto_stiffness_bounds: [f64; 2],
    pub n_frequencies: usize,
}

impl FarmConfig {
    pub const DEFAULT_SAFE_DISTANCE: f64 = 50.0;
    pub const DEFAULT_DAMPING_BOUNDS: [f64; 2] = [5.0e4, 4.0e5];
    pub const DEFAULT_STIFFNESS_BOUNDS: [f64; 2] = [1.0, 5.5e5];
    pub const DEFAULT_FREQUENCIES: usize = 50;

    /// Number of decision variables per buoy: `x`, `y`, then the stiffness
    /// and damping profiles.
    pub fn dims_per_buoy(&self) -> usize {
        2 + 2 * self.n_frequencies
    }

    pub fn dim(&self) -> usize {
        self.n_buoys * self.dims_per_buoy()
    }

    /// Same bounds for a different buoy count, keeping the side length.
    pub fn with_buoys(&self, n_buoys: usize) -> FarmConfig {
        FarmConfig { n_buoys, ..self.clone() }
    }

    pub fn with_frequencies(mut self, n_frequencies: usize) -> FarmConfig {
        self.n_frequencies = n_frequencies;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [d_l, d_u] = self.pto_damping_bounds;
        let [k_l, k_u] = self.pto_stiffness_bounds;
        if self.n_buoys < 1 {
            return Err(invalid("farm needs at least one buoy"));
        }
        if self.n_frequencies < 1 {
            return Err(invalid("farm needs at least one frequency"));
        }
        if !(0.0 < d_l && d_l < d_u) {
            return Err(invalid(format!("damping bounds must satisfy 0 < d_l < d_u, got [{d_l}, {d_u}]")));
        }
        if !(0.0 < k_l && k_l < k_u) {
            return Err(invalid(format!("stiffness bounds must satisfy 0 < k_l < k_u, got [{k_l}, {k_u}]")));
        }
        if !(self.safe_distance > 0.0) || !(self.side_length > 0.0) {
            return Err(invalid("safe distance and side length must be positive"));
        }
        Ok(())
    }

    /// Box bounds of the flat decision vector for this farm.
    pub fn bounds(&self) -> Bounds {
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        for _ in 0..self.n_buoys {
            lower.extend([0.0, 0.0]);
            upper.extend([self.side_length, self.side_length]);
            lower.extend(std::iter::repeat_n(self.pto_stiffness_bounds[0], self.n_frequencies));
            upper.extend(std::iter::repeat_n(self.pto_stiffness_bounds[1], self.n_frequencies));
            lower.extend(std::iter::repeat_n(self.pto_damping_bounds[0], self.n_frequencies));
            upper.extend(std::iter::repeat_n(self.pto_damping_bounds[1], self.n_frequencies));
        }
        Bounds { lower, upper }
    }
}

/// Builds the default farm configuration for `n_buoys` converters.
pub fn make_farm_config(n_buoys: usize) -> Result<FarmConfig> {
    if n_buoys < 1 {
        return Err(invalid("n_buoys must be at least 1"));
    }
    Ok(FarmConfig {
        n_buoys,
        side_length: (n_buoys as f64 * AREA_PER_BUOY).sqrt(),
        safe_distance: FarmConfig::DEFAULT_SAFE_DISTANCE,
        pto_damping_bounds: FarmConfig::DEFAULT_DAMPING_BOUNDS,
        pto_stiffness_bounds: FarmConfig::DEFAULT_STIFFNESS_BOUNDS,
        n_frequencies: FarmConfig::DEFAULT_FREQUENCIES,
    })
}

/// Per-frequency spring stiffness (N/m) and damping (N·s/m) of one buoy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtoProfile {
    pub stiffness: Vec<f64>,
    pub damping: Vec<f64>,
}

impl PtoProfile {
    pub fn uniform(n_frequencies: usize, k: f64, d: f64) -> Self {
        PtoProfile { stiffness: vec![k; n_frequencies], damping: vec![d; n_frequencies] }
    }
}

/// Positions and PTO settings of a farm.
///
/// The flat form orders each buoy as `[x, y, k_1..k_F, d_1..d_F]`, buoys
/// concatenated in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub positions: Vec<(f64, f64)>,
    pub pto: Vec<PtoProfile>,
}

impl Layout {
    pub fn n_buoys(&self) -> usize {
        self.positions.len()
    }

    pub fn n_frequencies(&self) -> usize {
        self.pto.first().map_or(0, |p| p.stiffness.len())
    }

    /// Checks the shape invariants against a farm configuration.
    pub fn check_shape(&self, cfg: &FarmConfig) -> Result<()> {
        if self.positions.len() != cfg.n_buoys || self.pto.len() != cfg.n_buoys {
            return Err(invalid(format!(
                "layout has {} positions and {} PTO profiles, expected {}",
                self.positions.len(),
                self.pto.len(),
                cfg.n_buoys
            )));
        }
        for p in &self.pto {
            if p.stiffness.len() != cfg.n_frequencies || p.damping.len() != cfg.n_frequencies {
                return Err(invalid("PTO profile length does not match n_frequencies"));
            }
        }
        Ok(())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let per = 2 + 2 * self.n_frequencies();
        let mut out = Vec::with_capacity(self.n_buoys() * per);
        for (pos, pto) in self.positions.iter().zip(&self.pto) {
            out.push(pos.0);
            out.push(pos.1);
            out.extend_from_slice(&pto.stiffness);
            out.extend_from_slice(&pto.damping);
        }
        out
    }

    pub fn from_flat(x: &[f64], n_frequencies: usize) -> Result<Layout> {
        let per = 2 + 2 * n_frequencies;
        if n_frequencies == 0 || x.len() % per != 0 {
            return Err(invalid(format!("flat vector of length {} is not a multiple of {per}", x.len())));
        }
        let mut positions = Vec::with_capacity(x.len() / per);
        let mut pto = Vec::with_capacity(x.len() / per);
        for chunk in x.chunks_exact(per) {
            positions.push((chunk[0], chunk[1]));
            pto.push(PtoProfile {
                stiffness: chunk[2..2 + n_frequencies].to_vec(),
                damping: chunk[2 + n_frequencies..].to_vec(),
            });
        }
        Ok(Layout { positions, pto })
    }

    /// True when every coordinate and PTO entry lies inside the box.
    pub fn within_box(&self, cfg: &FarmConfig) -> bool {
        let [k_l, k_u] = cfg.pto_stiffness_bounds;
        let [d_l, d_u] = cfg.pto_damping_bounds;
        let in_range = |v: f64, lo: f64, hi: f64| v >= lo && v <= hi;
        self.positions
            .iter()
            .all(|&(x, y)| in_range(x, 0.0, cfg.side_length) && in_range(y, 0.0, cfg.side_length))
            && self.pto.iter().all(|p| {
                p.stiffness.iter().all(|&k| in_range(k, k_l, k_u))
                    && p.damping.iter().all(|&d| in_range(d, d_l, d_u))
            })
    }
}

/// Projects a layout onto the box bounds, coordinate by coordinate.
///
/// Distance violations are left alone; they are handled by the penalty.
pub fn clamp_to_bounds(layout: &Layout, cfg: &FarmConfig) -> Layout {
    let [k_l, k_u] = cfg.pto_stiffness_bounds;
    let [d_l, d_u] = cfg.pto_damping_bounds;
    Layout {
        positions: layout
            .positions
            .iter()
            .map(|&(x, y)| (x.clamp(0.0, cfg.side_length), y.clamp(0.0, cfg.side_length)))
            .collect(),
        pto: layout
            .pto
            .iter()
            .map(|p| PtoProfile {
                stiffness: p.stiffness.iter().map(|k| k.clamp(k_l, k_u)).collect(),
                damping: p.damping.iter().map(|d| d.clamp(d_l, d_u)).collect(),
            })
            .collect(),
    }
}

/// Per-dimension box bounds of a flat search space.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(invalid("lower and upper bounds differ in length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(invalid("every lower bound must not exceed its upper bound"));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Self {
        Bounds { lower: vec![lower; dim], upper: vec![upper; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(l, u);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| v >= l && v <= u)
    }

    pub fn sample(&self, rng: &mut RandomStream) -> Vec<f64> {
        use rand::Rng;
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if u > l { rng.random_range(l..=u) } else { l })
            .collect()
    }

    /// Restricts the bounds to the given dimension indices.
    pub fn select(&self, indices: &[usize]) -> Bounds {
        Bounds {
            lower: indices.iter().map(|&i| self.lower[i]).collect(),
            upper: indices.iter().map(|&i| self.upper[i]).collect(),
        }
    }
}

/// Shared evaluation counter. Clones observe the same count.
#[derive(Debug, Clone)]
pub struct EvalBudget {
    inner: Arc<BudgetInner>,
}

#[derive(Debug)]
struct BudgetInner {
    max: u64,
    consumed: AtomicU64,
}

impl EvalBudget {
    pub fn new(max_evaluations: u64) -> Self {
        EvalBudget { inner: Arc::new(BudgetInner { max: max_evaluations, consumed: AtomicU64::new(0) }) }
    }

    pub fn max_evaluations(&self) -> u64 {
        self.inner.max
    }

    pub fn consumed(&self) -> u64 {
        self.inner.consumed.load(Ordering::SeqCst)
    }

    pub fn remaining(&self) -> u64 {
        self.inner.max - self.consumed()
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == 0
    }

    /// Reserves up to `n` evaluations and returns how many were granted.
    pub fn try_consume(&self, n: u64) -> u64 {
        let mut granted = 0;
        let _ = self.inner.consumed.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |used| {
            granted = n.min(self.inner.max - used);
            Some(used + granted)
        });
        granted
    }
}

/// A seeded random stream. Streams with the same `(seed, stream_id)` produce
/// the same sequence; distinct stream ids are independent.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream for a sub-consumer, derived from this stream's seed.
    pub fn derive(&self, stream_id: u64) -> RandomStream {
        RandomStream::new(self.seed, stream_id)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest, Strategy};
    use rand::Rng;

    #[test]
    fn side_length_follows_area_rule() {
        assert_abs_diff_eq!(make_farm_config(4).unwrap().side_length, 282.842_712_474_619, epsilon = 1e-9);
        assert_abs_diff_eq!(make_farm_config(16).unwrap().side_length, 565.685_424_949_238, epsilon = 1e-9);
        assert_abs_diff_eq!(make_farm_config(1).unwrap().side_length, 141.421_356_237_309_5, epsilon = 1e-9);
        assert!(make_farm_config(0).is_err());
    }

    #[test]
    fn default_bounds() {
        let cfg = make_farm_config(4).unwrap();
        assert_eq!(cfg.pto_damping_bounds, [5.0e4, 4.0e5]);
        assert_eq!(cfg.pto_stiffness_bounds, [1.0, 5.5e5]);
        assert_eq!(cfg.safe_distance, 50.0);
        assert_eq!(cfg.dim(), 4 * 102);
        cfg.validate().unwrap();
    }

    #[test]
    fn validate_rejects_inverted_bounds() {
        let mut cfg = make_farm_config(2).unwrap();
        cfg.pto_damping_bounds = [4.0e5, 5.0e4];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn clamp_examples() {
        let cfg = make_farm_config(4).unwrap().with_frequencies(2);
        let mut layout = Layout {
            positions: vec![(-5.0, 10.0), (100.0, 100.0), (200.0, 50.0), (50.0, 250.0)],
            pto: vec![PtoProfile::uniform(2, 1.0e5, 1.0e5); 4],
        };
        layout.pto[0].stiffness[1] = 6.0e5;
        let clamped = clamp_to_bounds(&layout, &cfg);
        assert_eq!(clamped.positions[0].0, 0.0);
        assert_eq!(clamped.pto[0].stiffness[1], 5.5e5);
        assert_eq!(clamp_to_bounds(&clamped, &cfg), clamped);
        assert!(clamped.within_box(&cfg));
    }

    #[test]
    fn flat_round_trip() {
        let layout = Layout {
            positions: vec![(1.0, 2.0), (3.0, 4.0)],
            pto: vec![
                PtoProfile { stiffness: vec![5.0, 6.0], damping: vec![7.0, 8.0] },
                PtoProfile { stiffness: vec![9.0, 10.0], damping: vec![11.0, 12.0] },
            ],
        };
        let flat = layout.to_flat();
        assert_eq!(flat, vec![1.0, 2.0, 5.0, 6.0, 7.0, 8.0, 3.0, 4.0, 9.0, 10.0, 11.0, 12.0]);
        assert_eq!(Layout::from_flat(&flat, 2).unwrap(), layout);
        assert!(Layout::from_flat(&flat[1..], 2).is_err());
    }

    #[test]
    fn budget_grants_at_most_remaining() {
        let b = EvalBudget::new(5);
        assert_eq!(b.try_consume(3), 3);
        let shared = b.clone();
        assert_eq!(shared.try_consume(3), 2);
        assert_eq!(b.consumed(), 5);
        assert!(b.is_exhausted());
        assert_eq!(b.try_consume(1), 0);
    }

    #[test]
    fn streams_are_reproducible_and_independent() {
        let mut a = RandomStream::new(7, 0);
        let mut b = RandomStream::new(7, 0);
        let mut c = RandomStream::new(7, 1);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    fn arb_layout() -> impl Strategy<Value = Layout> {
        let pos = (-100.0..400.0f64, -100.0..400.0f64);
        let pto = (prop::collection::vec(-1.0e5..8.0e5f64, 3), prop::collection::vec(0.0..6.0e5f64, 3))
            .prop_map(|(stiffness, damping)| PtoProfile { stiffness, damping });
        (prop::collection::vec(pos, 4), prop::collection::vec(pto, 4))
            .prop_map(|(positions, pto)| Layout { positions, pto })
    }

    proptest! {
        #[test]
        fn clamp_is_idempotent(layout in arb_layout()) {
            let cfg = make_farm_config(4).unwrap().with_frequencies(3);
            let once = clamp_to_bounds(&layout, &cfg);
            prop_assert_eq!(clamp_to_bounds(&once, &cfg), once.clone());
            prop_assert!(once.within_box(&cfg));
        }

        #[test]
        fn clamp_leaves_in_box_positions_alone(seed in any::<u64>()) {
            let cfg = make_farm_config(4).unwrap().with_frequencies(3);
            let mut rng = RandomStream::new(seed, 0);
            let mut x = cfg.bounds().sample(&mut rng);
            x[2] = 9.0e5;
            let layout = Layout::from_flat(&x, 3).unwrap();
            let clamped = clamp_to_bounds(&layout, &cfg);
            prop_assert_eq!(&clamped.positions, &layout.positions);
        }

        #[test]
        fn sampled_points_are_in_bounds(seed in any::<u64>(), lo in -10.0..0.0f64, width in 0.0..10.0f64) {
            let bounds = Bounds::uniform(5, lo, lo + width);
            let mut rng = RandomStream::new(seed, 3);
            let x = bounds.sample(&mut rng);
            prop_assert!(bounds.contains(&x));
            let _: f64 = rng.random();
        }
    }
}
