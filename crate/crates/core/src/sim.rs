//! Monte-Carlo harness for the Gaussian mean testing model.
//!
//! Every trial draws its stream from a ChaCha8 generator seeded with the
//! experiment seed and switched to the trial's own stream number, so a trial
//! is reproducible on its own and results do not depend on scheduling. Trials
//! run on the rayon pool and are folded in trial order.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::audit_budgets;
use crate::error::{invalid, Error, Result};
use crate::normal::sf;
use crate::procedures::{Decision, LagSpec, ProcedureConfig, Scheduler};
use crate::series::WeightSeries;

/// How the non-null probability π_Ai varies along the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignalPattern {
    Constant { pi_a: f64 },
    /// π_Ai = f for i ≤ ⌊T r⌋ and 0 afterwards.
    Clustered { f: f64, r: f64 },
    /// Per-index probabilities; the last value repeats.
    Sequence { values: Vec<f64> },
}

impl SignalPattern {
    pub fn pi_at(&self, i: usize, horizon: usize) -> f64 {
        match self {
            SignalPattern::Constant { pi_a } => *pi_a,
            SignalPattern::Clustered { f, r } => {
                let cut = (horizon as f64 * r).floor() as usize;
                if i <= cut {
                    *f
                } else {
                    0.0
                }
            }
            SignalPattern::Sequence { values } => values[(i - 1).min(values.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = match self {
            SignalPattern::Constant { pi_a } => unit(*pi_a),
            SignalPattern::Clustered { f, r } => unit(*f) && unit(*r),
            SignalPattern::Sequence { values } => !values.is_empty() && values.iter().all(|v| unit(*v)),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("signal probabilities must lie in [0, 1]: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub signal: SignalPattern,
    pub mu_a: f64,
    pub mu_n: f64,
    pub horizon: usize,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    /// Label every hypothesis null regardless of `signal`.
    #[serde(default)]
    pub force_null: bool,
    /// Consecutive blocks of this size share one Gaussian draw and form one
    /// batch for lag purposes.
    #[serde(default)]
    pub block: Option<usize>,
}

impl SimConfig {
    pub fn new(signal: SignalPattern, mu_a: f64, mu_n: f64, horizon: usize, alpha: f64, trials: usize, seed: u64) -> Self {
        SimConfig {
            signal,
            mu_a,
            mu_n,
            horizon,
            alpha,
            trials,
            seed,
            force_null: false,
            block: None,
        }
    }

    pub fn all_null(mut self) -> Self {
        self.force_null = true;
        self
    }

    pub fn with_blocks(mut self, size: usize) -> Self {
        self.block = Some(size);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.signal.validate()?;
        if self.horizon == 0 {
            return Err(invalid("horizon must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.mu_a.is_finite() && self.mu_n.is_finite()) {
            return Err(invalid("means must be finite"));
        }
        if self.block == Some(0) {
            return Err(invalid("block size must be at least 1"));
        }
        Ok(())
    }
}

/// One simulated stream with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub p_values: Vec<f64>,
    pub non_null: Vec<bool>,
    /// Lag of each hypothesis within its block; all zero without blocks.
    pub lags: Vec<u64>,
}

/// Draws the stream of trial `trial`. Labels and Gaussian noise for index i
/// are drawn in index order from the trial's own generator.
pub fn gen_stream(config: &SimConfig, trial: u64) -> Result<Stream> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let t = config.horizon;
    let mut p_values = Vec::with_capacity(t);
    let mut non_null = Vec::with_capacity(t);
    let mut lags = Vec::with_capacity(t);
    let mut shared = 0.0;
    for i in 1..=t {
        let u: f64 = rng.gen();
        let alt = !config.force_null && u < config.signal.pi_at(i, t);
        let lag = config.block.map_or(0, |b| ((i - 1) % b) as u64);
        let x: f64 = rng.sample(StandardNormal);
        if lag == 0 {
            shared = x;
        }
        let noise = if config.block.is_some() { shared } else { x };
        let z = noise + if alt { config.mu_a } else { config.mu_n };
        p_values.push(sf(z));
        non_null.push(alt);
        lags.push(lag);
    }
    Ok(Stream {
        p_values,
        non_null,
        lags,
    })
}

/// Point estimate with its standard error over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn from_values(xs: impl Iterator<Item = f64> + Clone, n: usize) -> Self {
        let n_f = n as f64;
        let mean = xs.clone().sum::<f64>() / n_f;
        let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n_f;
        Estimate {
            mean,
            se: (var / n_f).sqrt(),
        }
    }

    /// Standard error of a difference of independent estimates.
    pub fn combined_se(&self, other: &Estimate) -> f64 {
        self.se.hypot(other.se)
    }
}

/// Per-trial counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Rejected true nulls.
    pub false_rejections: u64,
    pub rejections: u64,
    pub true_rejections: u64,
    pub non_nulls: u64,
}

impl TrialOutcome {
    pub fn power(&self) -> f64 {
        if self.non_nulls == 0 {
            1.0
        } else {
            self.true_rejections as f64 / self.non_nulls as f64
        }
    }

    pub fn fdp(&self) -> f64 {
        self.false_rejections as f64 / self.rejections.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub procedure: String,
    pub trials: usize,
    pub fwer: Estimate,
    pub pfer: Estimate,
    pub power: Estimate,
    pub fdr: Estimate,
    pub mean_rejections: f64,
    /// `v_histogram[v]` counts trials with exactly v false rejections.
    pub v_histogram: Vec<u64>,
}

impl MetricsReport {
    pub fn from_outcomes(procedure: impl Into<String>, outcomes: &[TrialOutcome]) -> Self {
        let n = outcomes.len();
        let it = outcomes.iter();
        let max_v = it.clone().map(|o| o.false_rejections).max().unwrap_or(0) as usize;
        let mut v_histogram = vec![0u64; max_v + 1];
        for o in it.clone() {
            v_histogram[o.false_rejections as usize] += 1;
        }
        MetricsReport {
            procedure: procedure.into(),
            trials: n,
            fwer: Estimate::from_values(it.clone().map(|o| (o.false_rejections > 0) as u8 as f64), n),
            pfer: Estimate::from_values(it.clone().map(|o| o.false_rejections as f64), n),
            power: Estimate::from_values(it.clone().map(TrialOutcome::power), n),
            fdr: Estimate::from_values(it.clone().map(TrialOutcome::fdp), n),
            mean_rejections: it.map(|o| o.rejections as f64).sum::<f64>() / n as f64,
            v_histogram,
        }
    }

    /// Empirical P(V ≥ k) with its binomial standard error.
    pub fn kfwer(&self, k: usize) -> Estimate {
        let n = self.trials as f64;
        let hits: u64 = self.v_histogram.iter().skip(k).sum();
        let p = hits as f64 / n;
        Estimate {
            mean: p,
            se: (p * (1.0 - p) / n).sqrt(),
        }
    }
}

/// A procedure ready to be run on many streams.
struct Prepared {
    config: ProcedureConfig,
    series: Arc<WeightSeries>,
}

fn prepare(config: &ProcedureConfig, sim: &SimConfig) -> Result<Prepared> {
    config.validate()?;
    if config.alpha != sim.alpha {
        return Err(Error::Mismatch(format!(
            "procedure alpha {} differs from simulation alpha {}",
            config.alpha, sim.alpha
        )));
    }
    match config.lag_spec() {
        LagSpec::Constant { value } if value as usize >= sim.horizon && value > 0 => {
            return Err(Error::Mismatch(format!("lag {value} is not shorter than the horizon {}", sim.horizon)))
        }
        LagSpec::List { values } if values.len() > sim.horizon => {
            return Err(Error::Mismatch(format!(
                "{} lags given for a horizon of {}",
                values.len(),
                sim.horizon
            )))
        }
        LagSpec::FromBatchIds if sim.block.is_none() => {
            return Err(Error::Mismatch("lags from batch ids need a block-structured simulation".into()))
        }
        _ => {}
    }
    Ok(Prepared {
        config: config.clone(),
        series: Arc::new(config.series.build()?),
    })
}

/// Runs one procedure over a stream and audits the resulting trace.
fn run_one(prep: &Prepared, stream: &Stream) -> Result<TrialOutcome> {
    let mut sched = Scheduler::with_series(&prep.config, prep.series.clone())?;
    let from_batches = matches!(prep.config.lag_spec(), LagSpec::FromBatchIds);
    for (&p, &lag) in stream.p_values.iter().zip(&stream.lags) {
        if from_batches {
            sched.step_with_lag(p, lag)?;
        } else {
            sched.step(p)?;
        }
    }
    let trace = sched.into_trace();
    let report = audit_budgets(&trace, &prep.config)?;
    if let Some(c) = report.first_failure() {
        return Err(Error::InvariantViolation {
            index: c.first_violation.unwrap_or(0) as usize,
            message: format!("audit failed: {}", c.name),
        });
    }
    Ok(score(&trace, &stream.non_null))
}

pub fn score(trace: &[Decision], non_null: &[bool]) -> TrialOutcome {
    let mut o = TrialOutcome {
        false_rejections: 0,
        rejections: 0,
        true_rejections: 0,
        non_nulls: non_null.iter().filter(|x| **x).count() as u64,
    };
    for (d, &alt) in trace.iter().zip(non_null) {
        if d.rejected {
            o.rejections += 1;
            if alt {
                o.true_rejections += 1;
            } else {
                o.false_rejections += 1;
            }
        }
    }
    o
}

/// Runs every procedure on the same simulated streams, one report each.
pub fn estimate_many(procedures: &[ProcedureConfig], sim: &SimConfig) -> Result<Vec<MetricsReport>> {
    sim.validate()?;
    let prepared = procedures.iter().map(|c| prepare(c, sim)).collect::<Result<Vec<_>>>()?;
    let per_trial: Vec<Vec<TrialOutcome>> = (0..sim.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let stream = gen_stream(sim, trial)?;
            prepared.iter().map(|p| run_one(p, &stream)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(prepared
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let outcomes: Vec<TrialOutcome> = per_trial.iter().map(|t| t[k]).collect();
            MetricsReport::from_outcomes(p.config.procedure.name(), &outcomes)
        })
        .collect())
}

pub fn estimate_metrics(procedure: &ProcedureConfig, sim: &SimConfig) -> Result<MetricsReport> {
    Ok(estimate_many(std::slice::from_ref(procedure), sim)?.remove(0))
}

/// One plot-ready table row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub procedure: String,
    #[serde(rename = "pi_A")]
    pub pi_a: f64,
    /// Fraction of the stream carrying signals; 1 unless clustered.
    pub r: f64,
    #[serde(rename = "mu_A")]
    pub mu_a: f64,
    #[serde(rename = "mu_N")]
    pub mu_n: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub alpha: f64,
    pub fwer: f64,
    pub fwer_se: f64,
    pub pfer: f64,
    pub power: f64,
    pub power_se: f64,
    pub fdr: f64,
}

impl MetricsRow {
    /// The `pi_A` column holds π_A, f for clustered signals, or the mean of
    /// a per-index sequence.
    pub fn new(report: &MetricsReport, sim: &SimConfig) -> Self {
        let (pi_a, r) = match &sim.signal {
            SignalPattern::Constant { pi_a } => (*pi_a, 1.0),
            SignalPattern::Clustered { f, r } => (*f, *r),
            SignalPattern::Sequence { values } => (values.iter().sum::<f64>() / values.len() as f64, 1.0),
        };
        MetricsRow {
            procedure: report.procedure.clone(),
            pi_a,
            r,
            mu_a: sim.mu_a,
            mu_n: sim.mu_n,
            horizon: sim.horizon,
            alpha: sim.alpha,
            fwer: report.fwer.mean,
            fwer_se: report.fwer.se,
            pfer: report.pfer.mean,
            power: report.power.mean,
            power_se: report.power.se,
            fdr: report.fdr.mean,
        }
    }
}
