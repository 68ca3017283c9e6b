use std::process::ExitCode;

use clap::Parser;

mod commands;

use commands::Cli;

/// Exit-code taxonomy: 0 ok, 2 config, 3 parse/io, 4 validation, 5 resource.
fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap handles --help/--version itself; everything else is a
            // configuration problem.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(commands::EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
