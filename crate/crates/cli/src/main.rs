use clap::Parser;

use heatrad_cli::cli::{build_jobspec, Cli};
use heatrad_cli::execute::execute;
use heatrad_cli::jobspec::SpecError;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with success intent.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let job = match build_jobspec(cli.command.kind(), cli.command.args()) {
        Ok(j) => j,
        Err(e @ SpecError::Usage(_)) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
        Err(e @ SpecError::Io { .. }) => {
            eprintln!("{e}");
            std::process::exit(3);
        }
    };

    if let Err(e) = execute(&job) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
