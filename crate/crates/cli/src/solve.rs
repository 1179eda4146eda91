//! Power-theory solvers as (grid, value) tables.

use onlinefwer::power::{cstar_threshold, expected_true_discoveries, optimal_gamma_varying, optimal_q};
use onlinefwer::{GaussianMixModel, Horizon, WeightSeries};

use crate::cli::SolveArgs;
use crate::error::{CliError, CliResult};
use crate::run::output;
use crate::settings::parse_list;

fn horizons(text: &str) -> CliResult<Vec<Horizon>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "inf" | "infinite" => Ok(Horizon::Infinite),
            n => n
                .parse::<u64>()
                .map(Horizon::Finite)
                .map_err(|_| CliError::Config(format!("n: cannot parse '{n}'"))),
        })
        .collect()
}

fn horizon_label(h: Horizon) -> String {
    match h {
        Horizon::Finite(n) => n.to_string(),
        Horizon::Infinite => "inf".into(),
    }
}

fn single(name: &str, v: &[f64]) -> CliResult<f64> {
    match v {
        [x] => Ok(*x),
        _ => Err(CliError::Config(format!("{name} takes a single value here"))),
    }
}

/// Rows of the requested solver, header first.
pub fn table(args: &SolveArgs) -> CliResult<Vec<Vec<String>>> {
    let mu_a: Vec<f64> = parse_list("mu-a", &args.mu_a)?;
    let pi_a: Vec<f64> = parse_list("pi-a", &args.pi_a)?;
    let mut rows = Vec::new();
    match args.solver.as_str() {
        "optimal-q" => {
            let mu = single("mu-a", &mu_a)?;
            rows.push(vec!["N".into(), "q_star".into()]);
            for h in horizons(args.n.as_deref().unwrap_or("2,10,100,1000"))? {
                let Horizon::Finite(n) = h else {
                    return Err(CliError::Config("optimal-q needs finite horizons".into()));
                };
                rows.push(vec![n.to_string(), optimal_q(n, mu, args.alpha)?.to_string()]);
            }
        }
        "cstar" => {
            let mu = single("mu-a", &mu_a)?;
            rows.push(vec!["pi_A".into(), "c_star".into()]);
            for pi in pi_a {
                let m = GaussianMixModel::new(pi, mu, args.mu_n)?;
                rows.push(vec![pi.to_string(), cstar_threshold(&m)?.to_string()]);
            }
        }
        "optimal-gamma" => {
            let h = args
                .horizon
                .ok_or_else(|| CliError::Config("optimal-gamma needs --horizon".into()))?;
            let w = optimal_gamma_varying(&pi_a, &mu_a, args.alpha, h)?;
            rows.push(vec!["i".into(), "gamma".into()]);
            rows.extend(w.iter().enumerate().map(|(i, g)| vec![(i + 1).to_string(), g.to_string()]));
        }
        "expected-discoveries" => {
            let mu = single("mu-a", &mu_a)?;
            let pi = single("pi-a", &pi_a)?;
            let qs: Vec<f64> = parse_list("q", args.q.as_deref().unwrap_or("2"))?;
            let ns = horizons(args.n.as_deref().unwrap_or("inf"))?;
            rows.push(vec!["series".into(), "q".into(), "N".into(), "expected_discoveries".into()]);
            for &q in &qs {
                let series = match args.series.as_str() {
                    "q" => WeightSeries::q_series(q)?,
                    "logq" => WeightSeries::log_q_series(q)?,
                    other => return Err(CliError::Config(format!("unknown series '{other}'"))),
                };
                for &n in &ns {
                    let e = expected_true_discoveries(n, args.alpha, &series, pi, mu)?;
                    rows.push(vec![args.series.clone(), q.to_string(), horizon_label(n), e.to_string()]);
                }
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown solver '{other}' (expected optimal-q, cstar, optimal-gamma or expected-discoveries)"
            )))
        }
    }
    Ok(rows)
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let rows = table(args)?;
    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
