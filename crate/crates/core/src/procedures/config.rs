//! Serializable procedure configuration and its validation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::addis::check_lag_list;
use super::scheduler::{Schedule, Scheduler};
use super::{Family, ProcedureKind};
use crate::error::{invalid, Result};
use crate::series::SeriesSpec;

/// A τ or λ schedule: one value for every step, or a list whose last value
/// repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Constant(f64),
    Sequence(Vec<f64>),
}

impl ScheduleSpec {
    pub fn at(&self, i: u64) -> f64 {
        match self {
            ScheduleSpec::Constant(v) => *v,
            ScheduleSpec::Sequence(v) => {
                let idx = ((i.max(1) - 1) as usize).min(v.len().saturating_sub(1));
                v.get(idx).copied().unwrap_or(f64::NAN)
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            ScheduleSpec::Constant(v) => vec![*v],
            ScheduleSpec::Sequence(v) => v.clone(),
        }
    }

    fn len(&self) -> usize {
        match self {
            ScheduleSpec::Constant(_) => 1,
            ScheduleSpec::Sequence(v) => v.len(),
        }
    }
}

/// Local-dependence lags L_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LagSpec {
    Constant { value: u64 },
    /// Lags for the first steps; the last value repeats.
    List { values: Vec<u64> },
    /// Lags are the position within each contiguous batch of the input.
    FromBatchIds,
}

/// Transfer weights w_{k,i} of the fallback procedures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FallbackWeights {
    /// w_{k,i} = 1 if i = k + 1.
    OneStep,
    /// w_{k,i} = γ_{i−k}.
    LaggedGamma,
    /// `rows[k-1][d-1] = w_{k,k+d}`; entries past a row's end are zero.
    Explicit { rows: Vec<Vec<f64>> },
}

/// Which exponent budget ADDIS-Sidak uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidakBudget {
    /// β_i = ((τ_i − λ_i)/τ_i)·γ_{t(i)}.
    #[default]
    Scaled,
    /// β_i = (1 − λ_i)·γ_{t(i)}.
    Printed,
}

fn default_k() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcedureConfig {
    pub procedure: ProcedureKind,
    pub alpha: f64,
    #[serde(default)]
    pub series: SeriesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<ScheduleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lags: Option<LagSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_weights: Option<FallbackWeights>,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default)]
    pub sidak_budget: SidakBudget,
}

impl ProcedureConfig {
    pub fn new(procedure: ProcedureKind, alpha: f64) -> Self {
        ProcedureConfig {
            procedure,
            alpha,
            series: SeriesSpec::default(),
            tau: None,
            lambda: None,
            lags: None,
            fallback_weights: None,
            k: 1,
            sidak_budget: SidakBudget::Scaled,
        }
    }

    pub fn with_series(mut self, series: SeriesSpec) -> Self {
        self.series = series;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(ScheduleSpec::Constant(tau));
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(ScheduleSpec::Constant(lambda));
        self
    }

    pub fn with_lags(mut self, lags: LagSpec) -> Self {
        self.lags = Some(lags);
        self
    }

    pub fn with_weights(mut self, weights: FallbackWeights) -> Self {
        self.fallback_weights = Some(weights);
        self
    }

    pub fn with_sidak_budget(mut self, budget: SidakBudget) -> Self {
        self.sidak_budget = budget;
        self
    }

    pub fn tau_spec(&self) -> ScheduleSpec {
        self.tau
            .clone()
            .unwrap_or(ScheduleSpec::Constant(self.procedure.default_tau()))
    }

    pub fn lambda_spec(&self) -> ScheduleSpec {
        self.lambda
            .clone()
            .unwrap_or(ScheduleSpec::Constant(self.procedure.default_lambda()))
    }

    pub fn weights(&self) -> FallbackWeights {
        match self.procedure {
            ProcedureKind::OnlineFallback1 => FallbackWeights::OneStep,
            _ => self
                .fallback_weights
                .clone()
                .unwrap_or(FallbackWeights::LaggedGamma),
        }
    }

    pub fn lag_spec(&self) -> LagSpec {
        self.lags.clone().unwrap_or(LagSpec::Constant { value: 0 })
    }

    /// Budget spent by the Spending family: kα.
    pub fn budget(&self) -> f64 {
        self.k as f64 * self.alpha
    }

    /// Every problem with this configuration, in a fixed order.
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        match self.series.build() {
            Ok(s) => {
                let (lo, hi) = s.normalizer_bracket();
                if !s.is_explicit() && hi - lo > 1e-12 * hi {
                    out.push(format!("series normalizer bracket [{lo}, {hi}] is too wide"));
                }
            }
            Err(e) => out.push(format!("series: {e}")),
        }
        out.extend(self.schedule_findings());
        out
    }

    /// Findings about everything except alpha and the series.
    pub(super) fn schedule_findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let kind = self.procedure;
        let tau = self.tau_spec();
        let lambda = self.lambda_spec();
        if tau.len() == 0 {
            out.push("tau schedule is empty".into());
        }
        if lambda.len() == 0 {
            out.push("lambda schedule is empty".into());
        }
        for t in tau.values() {
            if !(t > 0.0 && t <= 1.0) {
                out.push(format!("tau must lie in (0, 1], got {t}"));
            } else if !kind.discards() && t != 1.0 {
                out.push(format!("{kind} does not discard; tau must be 1, got {t}"));
            }
        }
        for l in lambda.values() {
            if !(0.0..1.0).contains(&l) {
                out.push(format!("lambda must lie in [0, 1), got {l}"));
            } else if !kind.adapts() && l != 0.0 {
                out.push(format!("{kind} is not adaptive; lambda must be 0, got {l}"));
            }
        }
        let n = tau.len().max(lambda.len()).max(1) as u64;
        for i in 1..=n {
            let (t, l) = (tau.at(i), lambda.at(i));
            let bad = match kind {
                ProcedureKind::AddisSidak => l > t,
                _ => l >= t,
            };
            if kind.adapts() && kind.discards() && bad {
                out.push(format!("lambda ({l}) must be below tau ({t}) at step {i}"));
                break;
            }
            if matches!(kind.family(), Family::Sidak | Family::Fallback) && kind.discards() && t < self.alpha {
                out.push(format!("tau ({t}) must be at least alpha ({}) at step {i}", self.alpha));
                break;
            }
        }
        if let Some(lags) = &self.lags {
            if kind != ProcedureKind::AddisLocal {
                out.push(format!("{kind} does not accept lags"));
            } else if let LagSpec::List { values } = lags {
                if let Err(e) = check_lag_list(values) {
                    out.push(e.to_string());
                }
            }
        }
        if let Some(w) = &self.fallback_weights {
            match kind {
                ProcedureKind::OnlineFallback | ProcedureKind::DiscardFallback => {}
                ProcedureKind::OnlineFallback1 if *w == FallbackWeights::OneStep => {}
                _ => out.push(format!("{kind} does not accept fallback weights")),
            }
            if let FallbackWeights::Explicit { rows } = w {
                for (k, row) in rows.iter().enumerate() {
                    if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                        out.push(format!("fallback weight row {} has a negative or non-finite entry", k + 1));
                    }
                    let s: f64 = row.iter().sum();
                    if s > 1.0 + 1e-12 {
                        out.push(format!("fallback weight row {} sums to {s} > 1", k + 1));
                    }
                }
            }
        }
        if self.k == 0 {
            out.push("k must be at least 1".into());
        } else if self.k > 1 && kind.family() != Family::Spending {
            out.push(format!("k-FWER control needs a Spending-family procedure, not {kind}"));
        }
        if self.sidak_budget != SidakBudget::Scaled && kind != ProcedureKind::AddisSidak {
            out.push(format!("sidak_budget applies to addis-sidak only, not {kind}"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.findings().into_iter().next() {
            Some(msg) => Err(invalid(msg)),
            None => Ok(()),
        }
    }

    /// A fresh scheduler for this configuration.
    pub fn build(&self) -> Result<Scheduler> {
        self.validate()?;
        let series = Arc::new(self.series.build()?);
        Ok(Scheduler::from_parts(
            self.clone(),
            series,
            Schedule::from_spec(self.tau_spec()),
            Schedule::from_spec(self.lambda_spec()),
        ))
    }
}
