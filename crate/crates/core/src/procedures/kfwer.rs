//! k-FWER control by spending kα instead of α.

use super::{Family, ProcedureConfig};
use crate::error::{invalid, Result};

/// Wraps a Spending-family configuration so that its levels sum to kα.
pub fn kfwer_wrap(inner: ProcedureConfig, k: u32) -> Result<ProcedureConfig> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if inner.procedure.family() != Family::Spending {
        return Err(invalid(format!(
            "k-FWER control needs a Spending-family procedure, not {}",
            inner.procedure
        )));
    }
    let mut cfg = inner;
    cfg.k = k;
    cfg.validate()?;
    Ok(cfg)
}
