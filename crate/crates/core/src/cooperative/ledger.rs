use crate::error::{invalid, Result};

/// Relative improvement `(after - before) / after` of one sub-optimization.
pub fn fitness_improvement(before: f64, after: f64) -> Result<f64> {
    if !(after > 0.0) {
        return Err(invalid(format!("improvement needs a positive fitness after the step, got {after}")));
    }
    Ok((after - before) / after)
}

/// Running contribution `(u_prev + i) / 2`.
pub fn update_accumulated(u_prev: f64, i: f64) -> f64 {
    (u_prev + i) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub id: String,
    /// Accumulated contribution U.
    pub accumulated: f64,
    /// Improvement I of the latest invocation.
    pub last_improvement: Option<f64>,
    pub invocations: u64,
}

/// Per-optimizer contribution record used for online selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionLedger {
    entries: Vec<LedgerEntry>,
}

impl ContributionLedger {
    /// One zeroed entry per optimizer, in registration order.
    pub fn new<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        if ids.is_empty() {
            return Err(invalid("a contribution ledger needs at least one optimizer"));
        }
        Ok(ContributionLedger {
            entries: ids
                .iter()
                .map(|id| LedgerEntry { id: id.as_ref().to_string(), accumulated: 0.0, last_improvement: None, invocations: 0 })
                .collect(),
        })
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn accumulated(&self, index: usize) -> f64 {
        self.entries[index].accumulated
    }

    /// Records an improvement `i` for optimizer `index`; returns the new U.
    pub fn record_improvement(&mut self, index: usize, i: f64) -> f64 {
        let e = &mut self.entries[index];
        e.accumulated = update_accumulated(e.accumulated, i);
        e.last_improvement = Some(i);
        e.invocations += 1;
        e.accumulated
    }

    /// Records a `before -> after` step for optimizer `index`; returns I.
    pub fn record(&mut self, index: usize, before: f64, after: f64) -> Result<f64> {
        let i = fitness_improvement(before, after)?;
        self.record_improvement(index, i);
        Ok(i)
    }

    /// Index of the largest U; the earliest registered wins ties.
    pub fn select(&self) -> usize {
        let mut best = 0;
        for (i, e) in self.entries.iter().enumerate() {
            if e.accumulated > self.entries[best].accumulated {
                best = i;
            }
        }
        best
    }

    pub fn select_id(&self) -> &str {
        &self.entries[self.select()].id
    }
}

/// Identifier of the optimizer with the largest accumulated contribution.
pub fn select_optimizer(ledger: &ContributionLedger) -> &str {
    ledger.select_id()
}
