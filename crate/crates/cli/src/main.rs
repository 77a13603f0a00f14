//! `lppl` command-line tool.
//!
//! Exit codes: 0 success, 2 input or usage error, 3 the method found no
//! usable fit, 4 the requested statistical test is undefined.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use lppl::ErrorClass;

use crate::commands::Status;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(&cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Undefined) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Method => 3,
                ErrorClass::Undefined => 4,
            })
        }
    }
}
