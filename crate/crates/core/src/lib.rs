//! Online familywise-error-rate control.
//!
//! Stateful schedulers that assign a test level to each hypothesis in a
//! stream (Alpha-Spending, Online Sidak, Online Fallback, the discarding and
//! adaptive ADDIS family and their Sidak/Fallback hybrids), the power theory
//! for choosing their weight sequences, and a Monte-Carlo harness.

pub mod audit;
pub mod error;
pub mod normal;
pub mod numeric;
pub mod power;
pub mod procedures;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use procedures::{Decision, ProcedureConfig, ProcedureKind, Scheduler};
pub use series::{SeriesSpec, WeightSeries};
pub use audit::{audit_trace, AuditReport};
pub use power::{GaussianMixModel, Horizon};
pub use sim::{MetricsReport, SignalPattern, SimConfig};
