use std::process::ExitCode;

use clap::Parser;
use nlcurv::config::{resolve, Cli};
use nlcurv::run::{run, workers_from_env, RunError};

fn fail(err: RunError) -> ExitCode {
    eprintln!("error: {err}");
    println!("{}", err.record());
    ExitCode::from(err.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version also land here, with exit code 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => return fail(e.into()),
    };
    let workers = match workers_from_env() {
        Ok(w) => w,
        Err(e) => return fail(e.into()),
    };
    match run(&config, workers) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
