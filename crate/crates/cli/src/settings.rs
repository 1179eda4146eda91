//! Configuration files and their merge with command-line flags.

use std::path::{Path, PathBuf};

use onlinefwer::procedures::{FallbackWeights, LagSpec, ScheduleSpec, SidakBudget};
use onlinefwer::{ProcedureConfig, ProcedureKind, SeriesSpec};
use serde::Deserialize;

use crate::cli::ProcedureFlags;
use crate::error::{CliError, CliResult};
use crate::experiment::ExperimentSpec;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SeriesValue {
    Name(String),
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LagsValue {
    One(u64),
    Many(Vec<u64>),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WeightsValue {
    Name(String),
    Rows(Vec<Vec<f64>>),
}

/// Contents of a TOML configuration file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSettings {
    pub procedure: Option<String>,
    pub alpha: Option<f64>,
    pub series: Option<SeriesValue>,
    pub q: Option<f64>,
    pub tau: Option<ScheduleSpec>,
    pub lambda: Option<ScheduleSpec>,
    pub lags: Option<LagsValue>,
    pub weights: Option<WeightsValue>,
    pub k: Option<u32>,
    pub sidak_budget: Option<SidakBudget>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub experiment: Option<ExperimentSpec>,
    /// Directory that relative paths in the file are resolved against.
    #[serde(skip)]
    pub base: PathBuf,
}

impl FileSettings {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut s: FileSettings =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        s.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    pub fn load_opt(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(FileSettings::default()),
        }
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = PathBuf::from(path);
        if p.is_relative() && !self.base.as_os_str().is_empty() {
            self.base.join(p)
        } else {
            p
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| config_err(format!("{name}: cannot parse '{s}'"))))
        .collect()
}

fn schedule_flag(name: &str, text: &str) -> CliResult<ScheduleSpec> {
    let v: Vec<f64> = parse_list(name, text)?;
    match v.as_slice() {
        [] => Err(config_err(format!("{name} is empty"))),
        [x] => Ok(ScheduleSpec::Constant(*x)),
        _ => Ok(ScheduleSpec::Sequence(v)),
    }
}

fn lags_from(value: LagsValue) -> CliResult<LagSpec> {
    match value {
        LagsValue::One(v) => Ok(LagSpec::Constant { value: v }),
        LagsValue::Many(values) => Ok(LagSpec::List { values }),
        LagsValue::Name(s) if s.trim() == "batch" => Ok(LagSpec::FromBatchIds),
        LagsValue::Name(s) => {
            let values: Vec<u64> = parse_list("lags", &s)?;
            match values.as_slice() {
                [] => Err(config_err("lags is empty")),
                [v] => Ok(LagSpec::Constant { value: *v }),
                _ => Ok(LagSpec::List { values }),
            }
        }
    }
}

fn read_numbers(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    parse_list(&path.display().to_string(), &text)
}

fn read_rows(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_list(&path.display().to_string(), l))
        .collect()
}

/// Merges flags over a file and builds the procedure configuration.
pub fn procedure_config(flags: &ProcedureFlags, file: &FileSettings) -> CliResult<ProcedureConfig> {
    let name = flags
        .procedure
        .clone()
        .or_else(|| file.procedure.clone())
        .ok_or_else(|| config_err("no procedure given (--procedure)"))?;
    let kind: ProcedureKind = name.parse().map_err(|e: onlinefwer::Error| config_err(e.to_string()))?;
    let alpha = flags
        .alpha
        .or(file.alpha)
        .ok_or_else(|| config_err("no alpha given (--alpha)"))?;
    let q = flags.q.or(file.q);
    let series = match flags.series.clone().map(SeriesValue::Name).or_else(|| file.series.clone()) {
        None => match q {
            Some(q) => SeriesSpec::Logq { q },
            None => SeriesSpec::default(),
        },
        Some(SeriesValue::Name(s)) => match s.as_str() {
            "q" => SeriesSpec::Q { q: q.unwrap_or(2.0) },
            "logq" => SeriesSpec::Logq { q: q.unwrap_or(2.0) },
            path => SeriesSpec::Explicit {
                weights: read_numbers(&file.resolve(path))?,
            },
        },
        Some(SeriesValue::Weights(weights)) => SeriesSpec::Explicit { weights },
    };
    let mut cfg = ProcedureConfig::new(kind, alpha).with_series(series);
    cfg.tau = match &flags.tau {
        Some(t) => Some(schedule_flag("tau", t)?),
        None => file.tau.clone(),
    };
    cfg.lambda = match &flags.lambda {
        Some(t) => Some(schedule_flag("lambda", t)?),
        None => file.lambda.clone(),
    };
    cfg.lags = match flags.lags.clone().map(LagsValue::Name).or_else(|| file.lags.clone()) {
        Some(v) => Some(lags_from(v)?),
        None => None,
    };
    cfg.fallback_weights = match flags.weights.clone().map(WeightsValue::Name).or_else(|| file.weights.clone()) {
        None => None,
        Some(WeightsValue::Rows(rows)) => Some(FallbackWeights::Explicit { rows }),
        Some(WeightsValue::Name(s)) => Some(match s.as_str() {
            "one-step" => FallbackWeights::OneStep,
            "lagged-gamma" => FallbackWeights::LaggedGamma,
            path => FallbackWeights::Explicit {
                rows: read_rows(&file.resolve(path))?,
            },
        }),
    };
    if let Some(k) = flags.k.or(file.k) {
        cfg.k = k;
    }
    cfg.sidak_budget = match &flags.sidak_budget {
        Some(s) => match s.as_str() {
            "scaled" => SidakBudget::Scaled,
            "printed" => SidakBudget::Printed,
            other => return Err(config_err(format!("unknown sidak budget '{other}'"))),
        },
        None => file.sidak_budget.unwrap_or_default(),
    };
    Ok(cfg)
}
