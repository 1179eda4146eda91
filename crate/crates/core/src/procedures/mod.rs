//! Online FWER schedulers.
//!
//! Every procedure is driven by one [`Scheduler`]: it receives p-values one
//! at a time, assigns each hypothesis a level computed only from earlier
//! decisions, and keeps the full decision trace for auditing.

mod addis;
mod config;
mod core;
mod kfwer;
mod scheduler;
mod variants;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

pub use addis::{lags_from_batch_ids, LagTracker};
pub use config::{FallbackWeights, LagSpec, ProcedureConfig, ScheduleSpec, SidakBudget};
pub use self::core::sidak_level;
pub use kfwer::kfwer_wrap;
pub use scheduler::{Schedule, ScheduleFn, Scheduler};

/// Outcome record for one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub index: u64,
    pub p_value: f64,
    /// Assigned test level α_i.
    pub level: f64,
    pub tau: f64,
    pub lambda: f64,
    /// Exponent budget of the Sidak-type variants.
    pub beta: Option<f64>,
    pub lag: u64,
    pub selected: bool,
    pub candidate: bool,
    pub rejected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureKind {
    AlphaSpending,
    OnlineSidak,
    OnlineFallback,
    #[serde(rename = "online-fallback-1")]
    OnlineFallback1,
    Discard,
    Adaptive,
    Addis,
    AddisLocal,
    DiscardSidak,
    AdaptiveSidak,
    AddisSidak,
    DiscardFallback,
}

/// How a procedure turns its weight sequence into levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// α_i = α(τ_i − λ_i)γ_{t(i)}; controls the PFER.
    Spending,
    /// α_i = τ_i(1 − (1 − α)^{β_i}).
    Sidak,
    /// Spending plus recycling of rejected levels.
    Fallback,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 12] = [
        ProcedureKind::AlphaSpending,
        ProcedureKind::OnlineSidak,
        ProcedureKind::OnlineFallback,
        ProcedureKind::OnlineFallback1,
        ProcedureKind::Discard,
        ProcedureKind::Adaptive,
        ProcedureKind::Addis,
        ProcedureKind::AddisLocal,
        ProcedureKind::DiscardSidak,
        ProcedureKind::AdaptiveSidak,
        ProcedureKind::AddisSidak,
        ProcedureKind::DiscardFallback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProcedureKind::AlphaSpending => "alpha-spending",
            ProcedureKind::OnlineSidak => "online-sidak",
            ProcedureKind::OnlineFallback => "online-fallback",
            ProcedureKind::OnlineFallback1 => "online-fallback-1",
            ProcedureKind::Discard => "discard",
            ProcedureKind::Adaptive => "adaptive",
            ProcedureKind::Addis => "addis",
            ProcedureKind::AddisLocal => "addis-local",
            ProcedureKind::DiscardSidak => "discard-sidak",
            ProcedureKind::AdaptiveSidak => "adaptive-sidak",
            ProcedureKind::AddisSidak => "addis-sidak",
            ProcedureKind::DiscardFallback => "discard-fallback",
        }
    }

    pub fn family(self) -> Family {
        use ProcedureKind::*;
        match self {
            AlphaSpending | Discard | Adaptive | Addis | AddisLocal => Family::Spending,
            OnlineSidak | DiscardSidak | AdaptiveSidak | AddisSidak => Family::Sidak,
            OnlineFallback | OnlineFallback1 | DiscardFallback => Family::Fallback,
        }
    }

    /// Whether the procedure discards p-values above τ_i.
    pub fn discards(self) -> bool {
        use ProcedureKind::*;
        matches!(
            self,
            Discard | Addis | AddisLocal | DiscardSidak | AddisSidak | DiscardFallback
        )
    }

    /// Whether the procedure refunds budget for p-values below λ_i.
    pub fn adapts(self) -> bool {
        use ProcedureKind::*;
        matches!(self, Adaptive | Addis | AddisLocal | AdaptiveSidak | AddisSidak)
    }

    pub fn default_tau(self) -> f64 {
        if self.discards() {
            0.5
        } else {
            1.0
        }
    }

    pub fn default_lambda(self) -> f64 {
        use ProcedureKind::*;
        match self {
            Adaptive | AdaptiveSidak => 0.5,
            Addis | AddisLocal | AddisSidak => 0.25,
            _ => 0.0,
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProcedureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ProcedureKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown procedure '{s}'")))
    }
}
