use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::{FarmConfig, PtoProfile, RandomStream};
use crate::error::{invalid, Result};

/// Corner position `(side, 0)` with PTO settings drawn uniformly per
/// frequency.
pub fn place_first_buoy(cfg: &FarmConfig, rng: &mut RandomStream) -> ((f64, f64), PtoProfile) {
    let [k_l, k_u] = cfg.pto_stiffness_bounds;
    let [d_l, d_u] = cfg.pto_damping_bounds;
    let stiffness = (0..cfg.n_frequencies).map(|_| rng.random_range(k_l..=k_u)).collect();
    let damping = (0..cfg.n_frequencies).map(|_| rng.random_range(d_l..=d_u)).collect();
    ((cfg.side_length, 0.0), PtoProfile { stiffness, damping })
}

/// Position at `angle_deg` from `prev`, at a radius drawn uniformly from
/// `[safe, safe + r_prime]`. Returns the position and the radius.
pub fn symmetric_sample(
    prev: (f64, f64),
    angle_deg: f64,
    safe: f64,
    r_prime: f64,
    rng: &mut RandomStream,
) -> ((f64, f64), f64) {
    let r = if r_prime > 0.0 { rng.random_range(safe..=safe + r_prime) } else { safe };
    (offset(prev, angle_deg, r), r)
}

pub(crate) fn offset(prev: (f64, f64), angle_deg: f64, r: f64) -> (f64, f64) {
    let t = angle_deg.to_radians();
    (prev.0 + r * t.cos(), prev.1 + r * t.sin())
}

/// Position at a normally distributed offset from `prev`.
pub fn gaussian_sample(prev: (f64, f64), sigma: f64, rng: &mut RandomStream) -> (f64, f64) {
    let n = Normal::new(0.0, sigma).expect("non-negative sigma");
    (prev.0 + n.sample(rng), prev.1 + n.sample(rng))
}

/// Whether a new buoy at `p` keeps the box and the safe distance to every
/// placed buoy.
pub fn placement_feasible(p: (f64, f64), placed: &[(f64, f64)], cfg: &FarmConfig) -> bool {
    let inside = |v: f64| (0.0..=cfg.side_length).contains(&v);
    inside(p.0) && inside(p.1) && placed.iter().all(|q| (p.0 - q.0).hypot(p.1 - q.1) >= cfg.safe_distance)
}

/// Uniform random feasible position. After `tries` failures the least
/// violating sample is returned.
pub fn random_feasible_position(placed: &[(f64, f64)], cfg: &FarmConfig, tries: usize, rng: &mut RandomStream) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut best_gap = f64::NEG_INFINITY;
    for _ in 0..tries.max(1) {
        let p = (rng.random_range(0.0..=cfg.side_length), rng.random_range(0.0..=cfg.side_length));
        let gap = placed.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).fold(f64::INFINITY, f64::min);
        if gap >= cfg.safe_distance {
            return p;
        }
        if gap > best_gap {
            best = p;
            best_gap = gap;
        }
    }
    best
}

/// Indices of the `n_worst` lowest powers, lowest first; ties go to the
/// lower index.
pub fn find_worst(per_buoy_power: &[f64], n_worst: usize) -> Result<Vec<usize>> {
    if n_worst > per_buoy_power.len() {
        return Err(invalid(format!("cannot pick {n_worst} worst of {} buoys", per_buoy_power.len())));
    }
    let mut idx: Vec<usize> = (0..per_buoy_power.len()).collect();
    idx.sort_by(|&a, &b| per_buoy_power[a].total_cmp(&per_buoy_power[b]).then(a.cmp(&b)));
    idx.truncate(n_worst);
    Ok(idx)
}

/// Number of buoys revisited by backtracking, `round(n * fraction)`.
pub fn worst_count(n_buoys: usize, fraction: f64) -> usize {
    ((n_buoys as f64 * fraction).round() as usize).min(n_buoys)
}
