use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(symineq::cli::run(std::env::args_os()))
}
