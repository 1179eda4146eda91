use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use onlinefwer::audit::audit_trace;
use onlinefwer::procedures::LagSpec;

use crate::cli::RunArgs;
use crate::error::{CliError, CliResult};
use crate::input;
use crate::settings::{procedure_config, FileSettings};

pub fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Output(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let file = FileSettings::load_opt(args.procedure.config.as_deref())?;
    let cfg = procedure_config(&args.procedure, &file)?;
    let mut sched = cfg.build()?;
    let from_batches = matches!(cfg.lag_spec(), LagSpec::FromBatchIds);
    let format = input::format_for(&args.input, args.format);
    let records = input::open(&args.input, format)?;
    let out_path = args.out.clone().or(file.out.clone());
    let mut w = csv::Writer::from_writer(output(out_path.as_deref())?);
    w.write_record(["index", "p", "alpha_i", "rejected", "selected", "candidate"])?;

    let mut seen_batches = HashSet::new();
    let mut current_batch: Option<String> = None;
    let (mut false_rej, mut true_rej, mut labelled) = (0u64, 0u64, 0u64);
    for rec in records {
        let rec = rec?;
        let step = if from_batches {
            let id = rec
                .batch_id
                .clone()
                .ok_or_else(|| CliError::Input(format!("line {}: batch_id is required for batch lags", rec.line)))?;
            if current_batch.as_deref() != Some(id.as_str()) {
                if !seen_batches.insert(id.clone()) {
                    return Err(CliError::Input(format!(
                        "line {}: batch '{id}' reappears after another batch",
                        rec.line
                    )));
                }
                current_batch = Some(id.clone());
            }
            sched.step_in_batch(rec.p_value, &id)
        } else {
            sched.step(rec.p_value)
        };
        let d = step.map_err(|e| match CliError::from(e) {
            CliError::Input(m) => CliError::Input(format!("line {}: {m}", rec.line)),
            other => other,
        })?;
        if let Some(alt) = rec.label {
            labelled += 1;
            if d.rejected {
                if alt {
                    true_rej += 1;
                } else {
                    false_rej += 1;
                }
            }
        }
        w.write_record([
            d.index.to_string(),
            d.p_value.to_string(),
            d.level.to_string(),
            (d.rejected as u8).to_string(),
            (d.selected as u8).to_string(),
            (d.candidate as u8).to_string(),
        ])?;
    }
    w.flush()?;

    let report = audit_trace(sched.trace(), &cfg)?;
    if let Some(c) = report.first_failure() {
        return Err(CliError::Audit(format!(
            "{} fails at hypothesis {}",
            c.name,
            c.first_violation.unwrap_or(0)
        )));
    }
    if labelled > 0 {
        eprintln!("{labelled} labelled hypotheses: {true_rej} true and {false_rej} false rejections");
    }
    Ok(())
}
