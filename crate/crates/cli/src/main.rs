use std::io;
use std::process::ExitCode;

use clap::Parser;
use jtrates_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let env_seed = std::env::var("JTRATES_SEED").ok();
    match run(
        &cli,
        env_seed.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    ) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jtrates: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
