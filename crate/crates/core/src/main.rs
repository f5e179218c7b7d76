use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ese_lending::cli::run(std::env::args_os()))
}
