use crate::cli::ValidateArgs;
use crate::error::{CliError, CliResult};
use crate::settings::{procedure_config, FileSettings};

/// Every problem with the configuration, or an empty list.
pub fn findings(args: &ValidateArgs) -> CliResult<Vec<String>> {
    let path = args.file.as_deref().or(args.procedure.config.as_deref());
    let file = FileSettings::load_opt(path)?;
    let mut out = Vec::new();
    let has_procedure = args.procedure.procedure.is_some() || file.procedure.is_some();
    if has_procedure || (file.experiment.is_none() && file.preset.is_none()) {
        match procedure_config(&args.procedure, &file) {
            Ok(cfg) => out.extend(cfg.findings()),
            Err(e) => out.push(e.to_string()),
        }
    }
    if let Some(e) = &file.experiment {
        out.extend(e.findings());
    }
    if let Some(p) = &file.preset {
        match crate::experiment::preset(p) {
            Ok(e) => out.extend(e.findings()),
            Err(e) => out.push(e.to_string()),
        }
    }
    Ok(out)
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let found = findings(args)?;
    if found.is_empty() {
        println!("ok");
        return Ok(());
    }
    for f in &found {
        println!("fail: {f}");
    }
    Err(CliError::Config(format!("{} problem(s) found", found.len())))
}
