use std::process::ExitCode;

use clap::Parser;
use salfuse_cli::{run, Cli, Outcome, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    match run(&config) {
        Ok(Outcome::Fused(summary)) => println!("{}", summary.line()),
        Ok(Outcome::Evaluated(summary)) => println!("{}", summary.line()),
        Ok(Outcome::Benched(report)) => println!("{}", report.lines()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}
