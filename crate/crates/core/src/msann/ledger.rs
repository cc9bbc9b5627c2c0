use serde::{Deserialize, Serialize};

/// One training batch: step, level trained, cumulative cost after the
/// batch, and the batch MSE measured before the update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t: usize,
    pub level: usize,
    pub cost: f64,
    pub mse: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, level: usize, increment: f64, mse: f64) {
        let cost = self.total_cost() + increment;
        let t = self.entries.len() + 1;
        self.entries.push(LedgerEntry { t, level, cost, mse });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cost)
    }

    pub fn initial_mse(&self) -> Option<f64> {
        self.entries.first().map(|e| e.mse)
    }

    pub fn final_mse(&self) -> Option<f64> {
        self.entries.last().map(|e| e.mse)
    }

    pub fn max_level(&self) -> usize {
        self.entries.iter().map(|e| e.level).max().unwrap_or(0)
    }

    /// Cost at the first batch whose MSE is at most `fraction` of the first.
    pub fn cost_to_fraction(&self, fraction: f64) -> Option<f64> {
        let threshold = self.initial_mse()? * fraction;
        self.entries.iter().find(|e| e.mse <= threshold).map(|e| e.cost)
    }

    pub fn cost_to_tenth(&self) -> Option<f64> {
        self.cost_to_fraction(0.1)
    }

    /// Levels in visit order, one per run of consecutive equal levels.
    pub fn visits(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for e in &self.entries {
            if out.last() != Some(&e.level) {
                out.push(e.level);
            }
        }
        out
    }

    /// Cumulative costs are nondecreasing and steps count up from 1.
    pub fn is_consistent(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, e)| e.t == i + 1)
            && self.entries.windows(2).all(|w| w[1].cost >= w[0].cost)
    }
}
