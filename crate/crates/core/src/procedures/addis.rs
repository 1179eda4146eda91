//! Index advancement of the discarding and adaptive procedures, and the
//! local-dependence lag bookkeeping.

use super::ProcedureKind;
use crate::error::{Error, Result};

/// The weight index t(i) used at step `i`.
///
/// `selected[n]` and `candidates[n]` hold Σ_{j ≤ n} S_j and Σ_{j ≤ n} C_j.
pub(super) fn test_index(kind: ProcedureKind, i: u64, lag: u64, selected: &[u64], candidates: &[u64]) -> u64 {
    use ProcedureKind::*;
    let prev = (i - 1) as usize;
    match kind {
        AlphaSpending | OnlineSidak | OnlineFallback | OnlineFallback1 => i,
        Discard | DiscardSidak | DiscardFallback => 1 + selected[prev],
        Adaptive | AdaptiveSidak => i - candidates[prev],
        Addis | AddisSidak => 1 + selected[prev] - candidates[prev],
        AddisLocal => {
            // Σ_{j < i − L} (S_j − C_j) plus one pessimistic step per lagged index
            let seen = (i - 1).saturating_sub(lag) as usize;
            1 + lag.min(i - 1) + selected[seen] - candidates[seen]
        }
    }
}

/// Checks L_{i+1} ≤ L_i + 1 along a lag list.
pub(crate) fn check_lag_list(lags: &[u64]) -> Result<()> {
    for (idx, w) in lags.windows(2).enumerate() {
        if w[1] > w[0] + 1 {
            return Err(Error::InvalidParameter(format!(
                "lag L_{} = {} exceeds L_{} + 1 = {}",
                idx + 2,
                w[1],
                idx + 1,
                w[0] + 1
            )));
        }
    }
    Ok(())
}

/// Lags from contiguous batch ids: each item's lag is the number of earlier
/// items in its batch. A batch id that reappears after another batch is an
/// error.
pub fn lags_from_batch_ids<S: AsRef<str>>(ids: &[S]) -> Result<Vec<u64>> {
    let mut tracker = LagTracker::default();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(ids.len());
    for (pos, id) in ids.iter().enumerate() {
        let id = id.as_ref();
        let continuing = tracker.batch.as_deref() == Some(id);
        if !continuing && !seen.insert(id.to_string()) {
            return Err(Error::InvalidInput {
                index: pos + 1,
                message: format!("batch '{id}' is not contiguous"),
            });
        }
        out.push(tracker.batch_lag(id));
    }
    Ok(out)
}

/// Enforces lag admissibility step by step and tracks batch positions.
#[derive(Debug, Clone, Default)]
pub struct LagTracker {
    last: Option<u64>,
    batch: Option<String>,
    position: u64,
}

impl LagTracker {
    /// Lag of the next item of `batch_id`.
    pub fn batch_lag(&mut self, batch_id: &str) -> u64 {
        if self.batch.as_deref() == Some(batch_id) {
            self.position += 1;
        } else {
            self.batch = Some(batch_id.to_string());
            self.position = 0;
        }
        self.position
    }

    pub(super) fn admit(&mut self, i: u64, lag: u64) -> Result<()> {
        if let Some(prev) = self.last {
            if lag > prev + 1 {
                return Err(Error::InvalidParameter(format!(
                    "lag L_{i} = {lag} exceeds L_{} + 1 = {}",
                    i - 1,
                    prev + 1
                )));
            }
        }
        self.last = Some(lag);
        Ok(())
    }
}
