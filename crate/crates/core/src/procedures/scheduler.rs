//! The stateful level assignment shared by every procedure.

use std::fmt;
use std::sync::Arc;

use super::addis::{test_index, LagTracker};
use super::config::{FallbackWeights, LagSpec, ProcedureConfig, ScheduleSpec};
use super::core::{fallback_inflow, sidak_level};
use super::variants::sidak_beta;
use super::{Decision, Family, ProcedureKind};
use crate::error::{Error, Result};
use crate::series::WeightSeries;

/// A user schedule: receives the step index and the decisions it may see.
pub type ScheduleFn = Arc<dyn Fn(u64, &[Decision]) -> f64 + Send + Sync>;

/// τ or λ as a function of the visible trace prefix.
#[derive(Clone)]
pub enum Schedule {
    Spec(ScheduleSpec),
    Custom(ScheduleFn),
}

impl Schedule {
    pub fn from_spec(spec: ScheduleSpec) -> Self {
        Schedule::Spec(spec)
    }

    fn value(&self, i: u64, visible: &[Decision]) -> f64 {
        match self {
            Schedule::Spec(s) => s.at(i),
            Schedule::Custom(f) => f(i, visible),
        }
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Spec(s) => write!(f, "Spec({s:?})"),
            Schedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Assigns levels to a stream of p-values and records every decision.
///
/// Each level depends only on decisions strictly before the current step,
/// or before `i − L_i` for the local-dependence procedure.
#[derive(Debug, Clone)]
pub struct Scheduler {
    config: ProcedureConfig,
    series: Arc<WeightSeries>,
    tau: Schedule,
    lambda: Schedule,
    weights: FallbackWeights,
    lag_spec: LagSpec,
    trace: Vec<Decision>,
    // selected[n] = Σ_{j ≤ n} S_j, likewise for candidates
    selected: Vec<u64>,
    candidates: Vec<u64>,
    // (test index, realized level) of every rejection, for recycling
    ledger: Vec<(u64, f64)>,
    lags: LagTracker,
}

impl Scheduler {
    pub(super) fn from_parts(
        config: ProcedureConfig,
        series: Arc<WeightSeries>,
        tau: Schedule,
        lambda: Schedule,
    ) -> Self {
        let weights = config.weights();
        let lag_spec = config.lag_spec();
        Scheduler {
            config,
            series,
            tau,
            lambda,
            weights,
            lag_spec,
            trace: Vec::new(),
            selected: vec![0],
            candidates: vec![0],
            ledger: Vec::new(),
            lags: LagTracker::default(),
        }
    }

    /// Builds a scheduler around an already constructed series.
    pub fn with_series(config: &ProcedureConfig, series: Arc<WeightSeries>) -> Result<Self> {
        if !(config.alpha > 0.0 && config.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", config.alpha)));
        }
        if let Some(msg) = config.schedule_findings().into_iter().next() {
            return Err(Error::InvalidParameter(msg));
        }
        Ok(Scheduler::from_parts(
            config.clone(),
            series,
            Schedule::from_spec(config.tau_spec()),
            Schedule::from_spec(config.lambda_spec()),
        ))
    }

    /// Replaces the τ schedule with a predictable user rule.
    pub fn set_tau_fn<F>(&mut self, f: F) -> Result<()>
    where
        F: Fn(u64, &[Decision]) -> f64 + Send + Sync + 'static,
    {
        self.ensure_unstarted()?;
        if !self.kind().discards() {
            return Err(Error::Mismatch(format!("{} has no tau schedule", self.kind())));
        }
        self.tau = Schedule::Custom(Arc::new(f));
        Ok(())
    }

    /// Replaces the λ schedule with a predictable user rule.
    pub fn set_lambda_fn<F>(&mut self, f: F) -> Result<()>
    where
        F: Fn(u64, &[Decision]) -> f64 + Send + Sync + 'static,
    {
        self.ensure_unstarted()?;
        if !self.kind().adapts() {
            return Err(Error::Mismatch(format!("{} has no lambda schedule", self.kind())));
        }
        self.lambda = Schedule::Custom(Arc::new(f));
        Ok(())
    }

    fn ensure_unstarted(&self) -> Result<()> {
        if self.trace.is_empty() {
            Ok(())
        } else {
            Err(Error::Mismatch("schedules can only be replaced before the first step".into()))
        }
    }

    /// A copy with the same configuration and an empty trace.
    pub fn fresh(&self) -> Scheduler {
        Scheduler {
            config: self.config.clone(),
            series: Arc::clone(&self.series),
            tau: self.tau.clone(),
            lambda: self.lambda.clone(),
            weights: self.weights.clone(),
            lag_spec: self.lag_spec.clone(),
            trace: Vec::new(),
            selected: vec![0],
            candidates: vec![0],
            ledger: Vec::new(),
            lags: LagTracker::default(),
        }
    }

    pub fn kind(&self) -> ProcedureKind {
        self.config.procedure
    }

    pub fn config(&self) -> &ProcedureConfig {
        &self.config
    }

    pub fn series(&self) -> &Arc<WeightSeries> {
        &self.series
    }

    pub fn trace(&self) -> &[Decision] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<Decision> {
        self.trace
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    /// Tests the next hypothesis, taking its lag from the configured spec.
    pub fn step(&mut self, p: f64) -> Result<Decision> {
        let i = self.trace.len() as u64 + 1;
        let lag = match &self.lag_spec {
            LagSpec::Constant { value } => *value,
            LagSpec::List { values } => {
                let idx = ((i - 1) as usize).min(values.len().saturating_sub(1));
                values.get(idx).copied().unwrap_or(0)
            }
            LagSpec::FromBatchIds => {
                return Err(Error::Mismatch(
                    "lags come from batch ids; use step_in_batch".into(),
                ))
            }
        };
        self.advance(p, lag)
    }

    /// Tests the next hypothesis with an explicit lag L_i.
    pub fn step_with_lag(&mut self, p: f64, lag: u64) -> Result<Decision> {
        self.advance(p, lag)
    }

    /// Tests the next hypothesis of batch `batch_id`; its lag is the number of
    /// earlier items of the same contiguous batch.
    pub fn step_in_batch(&mut self, p: f64, batch_id: &str) -> Result<Decision> {
        let lag = self.lags.batch_lag(batch_id);
        self.advance(p, lag)
    }

    /// Runs a whole stream and returns its decisions.
    pub fn run(&mut self, ps: &[f64]) -> Result<Vec<Decision>> {
        let start = self.trace.len();
        for &p in ps {
            self.step(p)?;
        }
        Ok(self.trace[start..].to_vec())
    }

    fn advance(&mut self, p: f64, lag: u64) -> Result<Decision> {
        let kind = self.kind();
        let i = self.trace.len() as u64 + 1;
        let at = i as usize;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput {
                index: at,
                message: format!("p-value {p} is outside [0, 1]"),
            });
        }
        if lag > 0 && kind != ProcedureKind::AddisLocal {
            return Err(Error::Mismatch(format!("{kind} does not accept lags")));
        }
        self.lags.admit(i, lag)?;

        let visible = (i - 1).saturating_sub(lag) as usize;
        let prefix = &self.trace[..visible];
        let tau = self.tau.value(i, prefix);
        let lambda = self.lambda.value(i, prefix);
        self.check_schedule(at, tau, lambda)?;

        let t = test_index(kind, i, lag, &self.selected, &self.candidates);
        let gamma = self.series.gamma(t);
        let alpha = self.config.alpha;
        let (level, beta) = match kind.family() {
            Family::Spending => (self.config.budget() * (tau - lambda) * gamma, None),
            Family::Sidak => {
                let beta = sidak_beta(kind, self.config.sidak_budget, tau, lambda, gamma);
                (tau * sidak_level(alpha, beta), Some(beta))
            }
            Family::Fallback => {
                let base = alpha * gamma;
                let inflow = fallback_inflow(&self.weights, &self.series, &self.ledger, t, base);
                (tau * inflow, None)
            }
        };
        if !(level.is_finite() && level >= 0.0 && level < tau && level < 1.0) {
            return Err(Error::InvariantViolation {
                index: at,
                message: format!("level {level} is not below tau {tau}"),
            });
        }

        let selected = p <= tau;
        let candidate = lambda > 0.0 && p <= lambda;
        let rejected = p <= level;
        let d = Decision {
            index: i,
            p_value: p,
            level,
            tau,
            lambda,
            beta,
            lag,
            selected,
            candidate,
            rejected,
        };
        self.trace.push(d);
        let s = *self.selected.last().unwrap_or(&0);
        let c = *self.candidates.last().unwrap_or(&0);
        self.selected.push(s + selected as u64);
        self.candidates.push(c + candidate as u64);
        if rejected && kind.family() == Family::Fallback {
            self.ledger.push((t, level));
        }
        Ok(d)
    }

    fn check_schedule(&self, at: usize, tau: f64, lambda: f64) -> Result<()> {
        let kind = self.kind();
        let bad = |msg: String| Err(Error::InvalidParameter(format!("step {at}: {msg}")));
        if !(tau > 0.0 && tau <= 1.0) {
            return bad(format!("tau {tau} is outside (0, 1]"));
        }
        if !(0.0..1.0).contains(&lambda) {
            return bad(format!("lambda {lambda} is outside [0, 1)"));
        }
        if !kind.discards() && tau != 1.0 {
            return bad(format!("{kind} requires tau = 1"));
        }
        if !kind.adapts() && lambda != 0.0 {
            return bad(format!("{kind} requires lambda = 0"));
        }
        let ordered = match kind {
            ProcedureKind::AddisSidak => lambda <= tau,
            _ => lambda < tau,
        };
        if !ordered {
            return bad(format!("lambda {lambda} must be below tau {tau}"));
        }
        if kind.discards() && kind.family() != Family::Spending && tau < self.config.alpha {
            return bad(format!("tau {tau} is below alpha {}", self.config.alpha));
        }
        Ok(())
    }
}
