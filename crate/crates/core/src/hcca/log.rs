use std::io::Write;

use serde::Serialize;

use crate::domain::{Layout, PtoProfile};
use crate::error::Result;

/// A sampled position for a new buoy.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCandidate {
    pub angle: Option<f64>,
    pub radius: Option<f64>,
    pub position: (f64, f64),
    /// Drawn around the best angle after the first round.
    pub refinement: bool,
    /// Inside the box and clear of every placed buoy.
    pub feasible: bool,
    /// Set once evaluated; infeasible candidates are never evaluated.
    pub fitness: Option<f64>,
}

impl SampledCandidate {
    pub(crate) fn new(angle: Option<f64>, radius: Option<f64>, position: (f64, f64), refinement: bool) -> Self {
        SampledCandidate { angle, radius, position, refinement, feasible: false, fitness: None }
    }
}

/// Everything that happened while placing one buoy.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementRecord {
    /// Zero-based index of the placed buoy.
    pub buoy: usize,
    pub candidates: Vec<SampledCandidate>,
    /// The farm before this buoy was added.
    pub base: Layout,
    /// PTO the new buoy started from.
    pub start_pto: PtoProfile,
    pub angle: Option<f64>,
    pub radius: Option<f64>,
    /// No sampled candidate was feasible and a uniform position was used.
    pub fallback: bool,
    pub sampled_position: (f64, f64),
    pub final_position: (f64, f64),
    pub pto_optimizer: String,
    pub pre_pto_fitness: f64,
    pub post_pto_fitness: f64,
    /// PTO after the PTO phase; position refinement leaves it unchanged.
    pub final_pto: PtoProfile,
    pub final_fitness: f64,
    /// Evaluations charged while placing this buoy.
    pub evaluations: u64,
}

#[derive(Serialize)]
struct Row<'a> {
    buoy: usize,
    angle_deg: Option<f64>,
    radius_m: Option<f64>,
    fallback: bool,
    candidates: usize,
    sampled_x: f64,
    sampled_y: f64,
    final_x: f64,
    final_y: f64,
    pto_optimizer: &'a str,
    pre_pto_watts: f64,
    post_pto_watts: f64,
    final_watts: f64,
    evaluations: u64,
}

/// Writes one CSV line per placed buoy.
pub fn write_placement_log<W: Write>(records: &[PlacementRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(Row {
            buoy: r.buoy,
            angle_deg: r.angle,
            radius_m: r.radius,
            fallback: r.fallback,
            candidates: r.candidates.len(),
            sampled_x: r.sampled_position.0,
            sampled_y: r.sampled_position.1,
            final_x: r.final_position.0,
            final_y: r.final_position.1,
            pto_optimizer: &r.pto_optimizer,
            pre_pto_watts: r.pre_pto_fitness,
            post_pto_watts: r.post_pto_fitness,
            final_watts: r.final_fitness,
            evaluations: r.evaluations,
        })?;
    }
    w.flush()?;
    Ok(())
}
