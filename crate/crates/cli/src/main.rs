use std::process::ExitCode;

fn main() -> ExitCode {
    ifit_cli::run(std::env::args_os())
}
