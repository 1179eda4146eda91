//! Prefix budget checks and replay of decision traces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::procedures::{sidak_level, Decision, Family, ProcedureConfig, ProcedureKind, SidakBudget};

const REL_TOL: f64 = 1e-12;

/// Outcome of one constraint over every prefix of a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// First index at which the constraint fails.
    pub first_violation: Option<u64>,
    /// Largest observed value of the constrained quantity.
    pub worst: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub procedure: ProcedureKind,
    pub steps: usize,
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Running prefix sum that records the first index where it exceeds `bound`.
struct PrefixSum {
    name: String,
    bound: f64,
    sum: f64,
    worst: f64,
    first: Option<u64>,
}

impl PrefixSum {
    fn new(name: impl Into<String>, bound: f64) -> Self {
        PrefixSum {
            name: name.into(),
            bound,
            sum: 0.0,
            worst: 0.0,
            first: None,
        }
    }

    fn add(&mut self, index: u64, x: f64) {
        self.sum += x;
        self.worst = self.worst.max(self.sum);
        if self.first.is_none() && !(self.sum <= self.bound * (1.0 + REL_TOL)) {
            self.first = Some(index);
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name,
            passed: self.first.is_none(),
            first_violation: self.first,
            worst: self.worst,
            bound: self.bound,
        }
    }
}

fn pointwise(name: &str, trace: &[Decision], ok: impl Fn(&Decision) -> bool) -> Check {
    let first = trace.iter().find(|d| !ok(d)).map(|d| d.index);
    Check {
        name: name.to_string(),
        passed: first.is_none(),
        first_violation: first,
        worst: 0.0,
        bound: 0.0,
    }
}

fn check_complete(trace: &[Decision], kind: ProcedureKind) -> Result<()> {
    for (pos, d) in trace.iter().enumerate() {
        let want = pos as u64 + 1;
        if d.index != want {
            return Err(Error::IncompleteTrace(format!(
                "expected hypothesis {want}, found {}",
                d.index
            )));
        }
        if !(d.p_value.is_finite() && d.level.is_finite() && d.tau.is_finite() && d.lambda.is_finite()) {
            return Err(Error::IncompleteTrace(format!("hypothesis {want} has a missing field")));
        }
        if kind.family() == Family::Sidak && d.beta.is_none() {
            return Err(Error::IncompleteTrace(format!("hypothesis {want} lacks its beta")));
        }
    }
    Ok(())
}

/// Budget and consistency checks on every prefix, without replay.
pub fn audit_budgets(trace: &[Decision], config: &ProcedureConfig) -> Result<AuditReport> {
    let kind = config.procedure;
    check_complete(trace, kind)?;
    let mut checks = vec![
        pointwise("rejection rule R = (p <= alpha_i)", trace, |d| d.rejected == (d.p_value <= d.level)),
        pointwise("selection rule S = (p <= tau_i)", trace, |d| d.selected == (d.p_value <= d.tau)),
        pointwise("candidate rule C = (lambda_i > 0 and p <= lambda_i)", trace, |d| {
            d.candidate == (d.lambda > 0.0 && d.p_value <= d.lambda)
        }),
        pointwise("alpha_i < tau_i", trace, |d| d.level < d.tau && d.level >= 0.0),
    ];
    let alpha = config.alpha;
    match kind.family() {
        Family::Spending => {
            let name = match kind {
                ProcedureKind::AlphaSpending => "sum alpha_i <= k alpha",
                ProcedureKind::Discard => "sum over S of alpha_i / tau_i <= k alpha",
                ProcedureKind::Adaptive => "sum over not C of alpha_i / (1 - lambda_i) <= k alpha",
                _ => "sum over S minus C of alpha_i / (tau_i - lambda_i) <= k alpha",
            };
            let mut s = PrefixSum::new(name, config.budget());
            for d in trace {
                let x = if d.selected && !d.candidate { d.level / (d.tau - d.lambda) } else { 0.0 };
                s.add(d.index, x);
            }
            checks.push(s.finish());
        }
        Family::Sidak => {
            if kind == ProcedureKind::OnlineSidak {
                // Π(1 − α_i) ≥ 1 − α, compared in the log domain
                let bound = -(-alpha).ln_1p();
                let mut s = PrefixSum::new("prod (1 - alpha_i) >= 1 - alpha", bound);
                for d in trace {
                    s.add(d.index, -(-d.level).ln_1p());
                }
                checks.push(s.finish());
            }
            let beta = |d: &Decision| d.beta.unwrap_or(f64::NAN);
            let mut printed = match kind {
                ProcedureKind::OnlineSidak | ProcedureKind::DiscardSidak => {
                    PrefixSum::new("sum over S of beta_i <= 1", 1.0)
                }
                ProcedureKind::AdaptiveSidak => {
                    PrefixSum::new("sum over not C of beta_i / (1 - lambda_i) <= 1", 1.0)
                }
                _ => PrefixSum::new("sum over S minus C of beta_i / (1 - lambda_i) <= 1", 1.0),
            };
            let mut scaled = (kind == ProcedureKind::AddisSidak && config.sidak_budget == SidakBudget::Scaled)
                .then(|| PrefixSum::new("sum over S minus C of beta_i tau_i / (tau_i - lambda_i) <= 1", 1.0));
            for d in trace {
                let counted = d.selected && !d.candidate;
                printed.add(d.index, if counted { beta(d) / (1.0 - d.lambda) } else { 0.0 });
                if let Some(s) = scaled.as_mut() {
                    let x = if counted { beta(d) * d.tau / (d.tau - d.lambda) } else { 0.0 };
                    s.add(d.index, x);
                }
            }
            checks.push(printed.finish());
            checks.extend(scaled.map(PrefixSum::finish));
            checks.push(pointwise("alpha_i = tau_i (1 - (1 - alpha)^beta_i)", trace, |d| {
                let want = d.tau * sidak_level(alpha, beta(d));
                (d.level - want).abs() <= 4.0 * f64::EPSILON * want
            }));
        }
        Family::Fallback => {
            // recycled mass only leaves rejected hypotheses, so the levels of
            // non-rejected selected ones never exceed the initial budget
            let mut s = PrefixSum::new("sum over S minus R of alpha_i / tau_i <= alpha", alpha);
            for d in trace {
                let x = if d.selected && !d.rejected { d.level / d.tau } else { 0.0 };
                s.add(d.index, x);
            }
            checks.push(s.finish());
        }
    }
    Ok(AuditReport {
        procedure: kind,
        steps: trace.len(),
        checks,
    })
}

/// Budget checks plus a replay: the configured procedure, fed the recorded
/// p-values and lags, must reproduce every level and flag bit for bit.
pub fn audit_trace(trace: &[Decision], config: &ProcedureConfig) -> Result<AuditReport> {
    let mut report = audit_budgets(trace, config)?;
    let mut scheduler = config.build()?;
    let mut first = None;
    for d in trace {
        let same = match scheduler.step_with_lag(d.p_value, d.lag) {
            Ok(r) => {
                r.level.to_bits() == d.level.to_bits()
                    && r.tau == d.tau
                    && r.lambda == d.lambda
                    && r.selected == d.selected
                    && r.candidate == d.candidate
                    && r.rejected == d.rejected
            }
            Err(_) => false,
        };
        if !same {
            first = Some(d.index);
            break;
        }
    }
    report.checks.push(Check {
        name: "replay reproduces the trace".into(),
        passed: first.is_none(),
        first_violation: first,
        worst: 0.0,
        bound: 0.0,
    });
    Ok(report)
}
