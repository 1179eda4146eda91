//! `onlinefwer`: run online FWER procedures over p-value files, simulate
//! experiment grids and evaluate the power-theory solvers.
//!
//! Exit codes: 0 success, 2 input error, 3 configuration error, 4 audit or
//! invariant failure, 1 output failure.

mod cli;
mod error;
mod experiment;
mod input;
mod run;
mod settings;
mod solve;
mod validate;

use clap::Parser;

use cli::{Cli, Command};

fn main() {
    let args = Cli::parse();
    let result = match &args.command {
        Command::Run(a) => run::cmd_run(a),
        Command::Experiment(a) => experiment::cmd_experiment(a),
        Command::Solve(a) => solve::cmd_solve(a),
        Command::Validate(a) => validate::cmd_validate(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
