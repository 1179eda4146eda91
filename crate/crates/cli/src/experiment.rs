//! Simulation grids and the named presets.

use onlinefwer::procedures::FallbackWeights;
use onlinefwer::sim::{estimate_many, MetricsRow};
use onlinefwer::{ProcedureConfig, ProcedureKind, SeriesSpec, SignalPattern, SimConfig};
use serde::Deserialize;

use crate::cli::ExperimentArgs;
use crate::error::{CliError, CliResult};
use crate::run::output;
use crate::settings::FileSettings;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ProcedureEntry {
    Name(String),
    Full(ProcedureConfig),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalGrid {
    Constant { pi_a: Vec<f64> },
    Clustered { f: Vec<f64>, r: Vec<f64> },
}

fn default_alpha() -> f64 {
    0.2
}

fn default_horizon() -> usize {
    1000
}

fn default_trials() -> usize {
    2000
}

fn default_seed() -> u64 {
    1
}

/// A full simulation grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub procedures: Vec<ProcedureEntry>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub mu_a: Vec<f64>,
    pub mu_n: Vec<f64>,
    pub signal: SignalGrid,
    #[serde(default)]
    pub force_null: bool,
    #[serde(default)]
    pub block: Option<usize>,
}

fn grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    // rounded so the grid prints as its decimal labels
    (0..count)
        .map(|k| ((start + step * k as f64) * 1e6).round() / 1e6)
        .collect()
}

fn named(kinds: &[ProcedureKind]) -> Vec<ProcedureEntry> {
    kinds.iter().map(|k| ProcedureEntry::Name(k.name().to_string())).collect()
}

fn fig2_procedures() -> Vec<ProcedureEntry> {
    let q2 = SeriesSpec::Q { q: 2.0 };
    [
        ProcedureKind::AlphaSpending,
        ProcedureKind::OnlineSidak,
        ProcedureKind::OnlineFallback1,
        ProcedureKind::OnlineFallback,
    ]
    .iter()
    .map(|k| {
        let mut c = ProcedureConfig::new(*k, 0.2).with_series(q2.clone());
        if *k == ProcedureKind::OnlineFallback {
            c = c.with_weights(FallbackWeights::LaggedGamma);
        }
        ProcedureEntry::Full(c)
    })
    .collect()
}

pub fn preset(name: &str) -> CliResult<ExperimentSpec> {
    use ProcedureKind::*;
    let base = ExperimentSpec {
        procedures: named(&[AlphaSpending, OnlineSidak, OnlineFallback, Addis]),
        alpha: 0.2,
        horizon: 1000,
        trials: 2000,
        seed: 1,
        mu_a: vec![4.0],
        mu_n: vec![0.0, -1.0],
        signal: SignalGrid::Constant {
            pi_a: grid(0.1, 0.1, 9),
        },
        force_null: false,
        block: None,
    };
    Ok(match name {
        "fig1" => base,
        "fig6" => ExperimentSpec {
            mu_a: vec![4.0, 5.0],
            mu_n: vec![0.0, -0.5, -1.0, -1.5],
            ..base
        },
        "fig2" => ExperimentSpec {
            procedures: fig2_procedures(),
            mu_n: vec![0.0],
            signal: SignalGrid::Clustered {
                f: grid(0.1, 0.1, 9),
                r: vec![1.0],
            },
            ..base
        },
        "clustered" => ExperimentSpec {
            procedures: fig2_procedures(),
            mu_n: vec![0.0],
            signal: SignalGrid::Clustered {
                f: vec![0.1],
                r: grid(0.1, 0.02, 9),
            },
            ..base
        },
        other => return Err(CliError::Config(format!("unknown preset '{other}'"))),
    })
}

impl ExperimentSpec {
    pub fn procedures(&self) -> CliResult<Vec<ProcedureConfig>> {
        self.procedures
            .iter()
            .map(|e| {
                let cfg = match e {
                    ProcedureEntry::Name(n) => {
                        let kind: ProcedureKind =
                            n.parse().map_err(|e: onlinefwer::Error| CliError::Config(e.to_string()))?;
                        ProcedureConfig::new(kind, self.alpha)
                    }
                    ProcedureEntry::Full(c) => c.clone(),
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }

    /// Every grid point, in output order.
    pub fn cells(&self) -> Vec<SimConfig> {
        let signals: Vec<SignalPattern> = match &self.signal {
            SignalGrid::Constant { pi_a } => pi_a.iter().map(|p| SignalPattern::Constant { pi_a: *p }).collect(),
            SignalGrid::Clustered { f, r } => f
                .iter()
                .flat_map(|f| r.iter().map(move |r| SignalPattern::Clustered { f: *f, r: *r }))
                .collect(),
        };
        let mut out = Vec::new();
        for &mu_a in &self.mu_a {
            for &mu_n in &self.mu_n {
                for s in &signals {
                    let mut c = SimConfig::new(s.clone(), mu_a, mu_n, self.horizon, self.alpha, self.trials, self.seed);
                    c.force_null = self.force_null;
                    c.block = self.block;
                    out.push(c);
                }
            }
        }
        out
    }

    /// Problems with the grid itself.
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.procedures.is_empty() {
            out.push("experiment lists no procedures".into());
        }
        if self.mu_a.is_empty() || self.mu_n.is_empty() {
            out.push("mu_a and mu_n grids must be non-empty".into());
        }
        let empty = match &self.signal {
            SignalGrid::Constant { pi_a } => pi_a.is_empty(),
            SignalGrid::Clustered { f, r } => f.is_empty() || r.is_empty(),
        };
        if empty {
            out.push("signal grid is empty".into());
        }
        if let Err(e) = self.procedures() {
            out.push(e.to_string());
        }
        for c in self.cells() {
            if let Err(e) = c.validate() {
                out.push(e.to_string());
                break;
            }
        }
        out
    }
}

pub fn resolve(args: &ExperimentArgs) -> CliResult<ExperimentSpec> {
    let file = FileSettings::load_opt(args.config.as_deref())?;
    let preset_name = args.preset.clone().or(file.preset.clone());
    let mut spec = match (preset_name, file.experiment.clone()) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give either a preset or an [experiment] table, not both".into()))
        }
        (Some(p), None) => preset(&p)?,
        (None, Some(e)) => e,
        (None, None) => return Err(CliError::Config("no preset or [experiment] table given".into())),
    };
    if let Some(t) = args.trials.or(file.trials) {
        spec.trials = t;
    }
    if let Some(s) = args.seed.or(file.seed) {
        spec.seed = s;
    }
    Ok(spec)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<()> {
    let spec = resolve(args)?;
    if let Some(f) = spec.findings().into_iter().next() {
        return Err(CliError::Config(f));
    }
    let procs = spec.procedures()?;
    let file = FileSettings::load_opt(args.config.as_deref())?;
    let out_path = args.out.clone().or(file.out);
    let mut w = csv::Writer::from_writer(output(out_path.as_deref())?);
    for cell in spec.cells() {
        for report in estimate_many(&procs, &cell)? {
            w.serialize(MetricsRow::new(&report, &cell))?;
        }
        w.flush()?;
    }
    Ok(())
}
