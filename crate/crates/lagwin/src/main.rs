use std::process::ExitCode;

use clap::Parser;
use lagwin::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { lagwin::error::exit::CONFIG } else { lagwin::error::exit::OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(lagwin::error::exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
