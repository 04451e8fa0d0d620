use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub t: u64,
    pub loss: f64,
    pub grad_norm_sq: f64,
    pub running_min_grad_norm_sq: f64,
    /// Cumulative `Σ (f_s(θ_s) − f_s(θ*))`, when comparator losses are supplied.
    pub regret: Option<f64>,
}

/// Per-step convergence statistics: running minimum of `‖∇f‖²` and
/// cumulative regret against a fixed comparator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLedger {
    records: Vec<LedgerRecord>,
    regret_sum: f64,
}

impl ConvergenceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_step(&mut self, t: u64, loss: f64, grad_norm_sq: f64, comparator_loss: Option<f64>) -> Result<&LedgerRecord> {
        if let Some(prev) = self.records.last() {
            if t <= prev.t {
                return Err(Error::OutOfOrderStep { t, previous: prev.t });
            }
        }
        let running_min = self
            .records
            .last()
            .map_or(grad_norm_sq, |r| r.running_min_grad_norm_sq.min(grad_norm_sq));
        let regret = comparator_loss.map(|c| {
            self.regret_sum += loss - c;
            self.regret_sum
        });
        self.records.push(LedgerRecord { t, loss, grad_norm_sq, running_min_grad_norm_sq: running_min, regret });
        Ok(self.records.last().unwrap())
    }

    pub fn records(&self) -> &[LedgerRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Result<&LedgerRecord> {
        self.records.last().ok_or(Error::EmptyLedger)
    }

    pub fn running_min(&self) -> Result<f64> {
        Ok(self.last()?.running_min_grad_norm_sq)
    }

    pub fn regret(&self) -> Result<Option<f64>> {
        Ok(self.last()?.regret)
    }

    /// `(t, R(t))` for every record that carries a regret value.
    pub fn regret_series(&self) -> Vec<(u64, f64)> {
        self.records.iter().filter_map(|r| r.regret.map(|v| (r.t, v))).collect()
    }

    pub fn running_min_series(&self) -> Vec<(u64, f64)> {
        self.records.iter().map(|r| (r.t, r.running_min_grad_norm_sq)).collect()
    }
}
