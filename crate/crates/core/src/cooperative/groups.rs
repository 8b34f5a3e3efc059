use serde::{Deserialize, Serialize};

use crate::domain::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Position,
    Pto,
    AllPositions,
    AllPtos,
    /// An arbitrary block of a generic problem.
    Block,
}

/// Indices of a block of the flat decision vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableGroup {
    pub kind: GroupKind,
    pub buoy: Option<usize>,
    pub indices: Vec<usize>,
}

impl VariableGroup {
    pub fn position(buoy: usize, n_frequencies: usize) -> Self {
        let base = buoy * (2 + 2 * n_frequencies);
        VariableGroup { kind: GroupKind::Position, buoy: Some(buoy), indices: vec![base, base + 1] }
    }

    pub fn pto(buoy: usize, n_frequencies: usize) -> Self {
        let base = buoy * (2 + 2 * n_frequencies);
        VariableGroup { kind: GroupKind::Pto, buoy: Some(buoy), indices: (base + 2..base + 2 + 2 * n_frequencies).collect() }
    }

    pub fn all_positions(n_buoys: usize, n_frequencies: usize) -> Self {
        let indices = (0..n_buoys).flat_map(|b| Self::position(b, n_frequencies).indices).collect();
        VariableGroup { kind: GroupKind::AllPositions, buoy: None, indices }
    }

    pub fn all_ptos(n_buoys: usize, n_frequencies: usize) -> Self {
        let indices = (0..n_buoys).flat_map(|b| Self::pto(b, n_frequencies).indices).collect();
        VariableGroup { kind: GroupKind::AllPtos, buoy: None, indices }
    }

    /// Consecutive blocks of `size` (the last may be shorter).
    pub fn blocks(dim: usize, size: usize) -> Vec<Self> {
        (0..dim)
            .step_by(size.max(1))
            .map(|s| VariableGroup { kind: GroupKind::Block, buoy: None, indices: (s..(s + size).min(dim)).collect() })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Per-buoy position and PTO groups, position first for each buoy.
pub fn decompose(layout: &Layout) -> Vec<VariableGroup> {
    decompose_dims(layout.n_buoys(), layout.n_frequencies())
}

pub fn decompose_dims(n_buoys: usize, n_frequencies: usize) -> Vec<VariableGroup> {
    (0..n_buoys)
        .flat_map(|b| [VariableGroup::position(b, n_frequencies), VariableGroup::pto(b, n_frequencies)])
        .collect()
}
